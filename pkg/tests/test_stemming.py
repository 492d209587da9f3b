import pytest
from hypothesis import given, strategies as st

from littrend.stemming import stem

# classic input/output pairs of the original algorithm
VECTORS = {
    "caresses": "caress", "ponies": "poni", "ties": "ti", "caress": "caress",
    "cats": "cat", "feed": "feed", "agreed": "agre", "plastered": "plaster",
    "bled": "bled", "motoring": "motor", "sing": "sing", "conflated": "conflat",
    "troubled": "troubl", "sized": "size", "hopping": "hop", "tanned": "tan",
    "falling": "fall", "hissing": "hiss", "fizzed": "fizz", "failing": "fail",
    "filing": "file", "happy": "happi", "sky": "sky", "relational": "relat",
    "conditional": "condit", "rational": "ration", "valenci": "valenc",
    "hesitanci": "hesit", "digitizer": "digit", "conformabli": "conform",
    "radicalli": "radic", "differentli": "differ", "vileli": "vile",
    "analogousli": "analog", "vietnamization": "vietnam", "predication": "predic",
    "operator": "oper", "feudalism": "feudal", "decisiveness": "decis",
    "hopefulness": "hope", "callousness": "callous", "formaliti": "formal",
    "sensitiviti": "sensit", "sensibiliti": "sensibl", "triplicate": "triplic",
    "formative": "form", "formalize": "formal", "electrical": "electr",
    "hopeful": "hope", "goodness": "good", "revival": "reviv",
    "allowance": "allow", "inference": "infer", "airliner": "airlin",
    "gyroscopic": "gyroscop", "adjustable": "adjust", "defensible": "defens",
    "irritant": "irrit", "replacement": "replac", "adjustment": "adjust",
    "dependent": "depend", "adoption": "adopt", "communism": "commun",
    "activate": "activ", "angulariti": "angular", "homologous": "homolog",
    "effective": "effect", "bowdlerize": "bowdler", "probate": "probat",
    "rate": "rate", "cease": "ceas", "controll": "control", "roll": "roll",
}


@pytest.mark.parametrize("word,expected", sorted(VECTORS.items()))
def test_reference_vectors(word, expected):
    assert stem(word) == expected


def test_domain_words_collapse_as_documented():
    # the documented behavior the corpus pipeline relies on
    assert stem("cooperation") == "cooper"
    assert stem("cooperate") == "cooper"
    assert stem("cooperative") == "cooper"
    assert stem("collude") == "collud"
    assert stem("colluding") == "collud"
    assert stem("collusion") == "collus"
    assert stem("competition") == "competit"
    assert stem("leniency") == "lenienc"
    assert stem("first-price") == "first-pric"


def test_short_words_unchanged():
    for word in ("a", "be", "it", "x"):
        assert stem(word) == word


@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=20))
def test_stem_never_longer_and_pure_ascii(word):
    out = stem(word)
    assert len(out) <= len(word) + 1  # only the +e restorations can grow a stem
    assert out.isascii()


@given(st.sampled_from(sorted(VECTORS.values())))
def test_outputs_are_fixed_points_mostly(stemmed):
    # re-stemming the published outputs must be stable for this vocabulary
    assert stem(stem(stemmed)) == stem(stemmed)
