import textwrap

import pytest

from shiftmatch.modelfile import ModelFileError, dump_model, load_model, parse_model
from shiftmatch.potential import iid_weights, ising, zero_interaction


def test_ising_stanza():
    U = parse_model("[ising]\nJ = 0.5\nh = 0.25\n")
    assert U == ising(0.5, 0.25)


def test_iid_stanza_with_symbols():
    U = parse_model('[iid]\np = [0.8, 0.2]\nsymbols = ["H", "T"]\n')
    assert U.alphabet.symbols == ("H", "T")
    assert U.isclose(iid_weights([0.8, 0.2], symbols="HT"))


def test_zero_stanza():
    assert parse_model("[zero]\nsize = 4\n") == zero_interaction(4)


def test_general_form_round_trip():
    U = ising(0.5, 0.25)
    V = parse_model(dump_model(U))
    assert V == U
    assert V.name == U.name


def test_general_form_accumulates_terms():
    text = textwrap.dedent("""
        alphabet = ["x", "y"]
        range = 2

        [[term]]
        offsets = [0, 2]
        pattern = ["x", "y"]
        value = 1.5

        [[term]]
        offsets = [0, 2]
        pattern = ["x", "y"]
        value = 0.5
    """)
    U = parse_model(text)
    assert U.terms[(0, 2)][0, 1] == 2.0


@pytest.mark.parametrize("offsets,needle", [
    ("[1, 2]", "smallest"),
    ("[0, 0]", "strictly increasing"),
    ("[0, 3]", "exceed range"),
])
def test_bad_offsets_report_line(offsets, needle):
    text = textwrap.dedent(f"""\
        alphabet = ["a", "b"]
        range = 2

        [[term]]
        offsets = [0]
        pattern = ["a"]
        value = 1.0

        [[term]]
        offsets = {offsets}
        pattern = ["a", "b"]
        value = 1.0
    """)
    with pytest.raises(ModelFileError) as info:
        parse_model(text, source="m.toml")
    assert "m.toml:9:" in str(info.value)
    assert needle in str(info.value)


def test_pattern_length_mismatch():
    text = 'alphabet = ["a"]\nrange = 1\n[[term]]\noffsets = [0, 1]\npattern = ["a"]\nvalue = 1\n'
    with pytest.raises(ModelFileError, match=":3:"):
        parse_model(text)


def test_unknown_symbol_in_pattern():
    text = 'alphabet = ["a"]\nrange = 0\n[[term]]\noffsets = [0]\npattern = ["q"]\nvalue = 1\n'
    with pytest.raises(ModelFileError):
        parse_model(text)


def test_two_stanzas_rejected():
    with pytest.raises(ModelFileError):
        parse_model("[ising]\nJ = 1\n[zero]\nsize = 2\n")


def test_invalid_toml():
    with pytest.raises(ModelFileError, match="invalid TOML"):
        parse_model("[ising\n")


def test_bad_iid_probabilities():
    with pytest.raises(ModelFileError):
        parse_model("[iid]\np = [0.5, 0.6]\n")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.toml"):
        load_model(tmp_path / "nope.toml")


def test_id_defaults_to_stem(tmp_path):
    f = tmp_path / "coin.toml"
    f.write_text("[zero]\nsize = 2\n")
    assert load_model(f).name == "coin"
