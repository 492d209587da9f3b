"""Porter stemmer, original 1980 algorithm.

Collapses inflected and derived forms onto a shared stem so that e.g.
"cooperation", "cooperate" and "cooperative" all map to "cooper".
Input is expected to be a lowercase ASCII word; words of one or two
characters are returned unchanged, as in the reference algorithm.
"""

from __future__ import annotations

_VOWELS = frozenset("aeiou")


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    # number of vowel-to-consonant transitions, i.e. m in [C](VC)^m[V]
    m = 0
    prev_cons = None
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if prev_cons is False and cons:
            m += 1
        prev_cons = cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_cons(word, len(word) - 1)
    )


def _ends_cvc(stem: str) -> bool:
    # consonant-vowel-consonant where the final consonant is not w, x or y
    if len(stem) < 3:
        return False
    i = len(stem) - 1
    return (
        _is_cons(stem, i)
        and not _is_cons(stem, i - 1)
        and _is_cons(stem, i - 2)
        and stem[i] not in "wxy"
    )


def _apply_rules(word: str, rules) -> str:
    """First suffix that matches wins; its condition decides whether the
    replacement happens, and no later suffix is tried (as in the paper)."""
    for suffix, repl, cond in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if cond is None or cond(stem):
                return stem + repl
            return word
    return word


_M_GT_0 = lambda s: _measure(s) > 0  # noqa: E731
_M_GT_1 = lambda s: _measure(s) > 1  # noqa: E731

_STEP2_RULES = [
    ("ational", "ate", _M_GT_0),
    ("tional", "tion", _M_GT_0),
    ("enci", "ence", _M_GT_0),
    ("anci", "ance", _M_GT_0),
    ("izer", "ize", _M_GT_0),
    ("abli", "able", _M_GT_0),
    ("alli", "al", _M_GT_0),
    ("entli", "ent", _M_GT_0),
    ("eli", "e", _M_GT_0),
    ("ousli", "ous", _M_GT_0),
    ("ization", "ize", _M_GT_0),
    ("ation", "ate", _M_GT_0),
    ("ator", "ate", _M_GT_0),
    ("alism", "al", _M_GT_0),
    ("iveness", "ive", _M_GT_0),
    ("fulness", "ful", _M_GT_0),
    ("ousness", "ous", _M_GT_0),
    ("aliti", "al", _M_GT_0),
    ("iviti", "ive", _M_GT_0),
    ("biliti", "ble", _M_GT_0),
]

_STEP3_RULES = [
    ("icate", "ic", _M_GT_0),
    ("ative", "", _M_GT_0),
    ("alize", "al", _M_GT_0),
    ("iciti", "ic", _M_GT_0),
    ("ical", "ic", _M_GT_0),
    ("ful", "", _M_GT_0),
    ("ness", "", _M_GT_0),
]

_STEP4_SUFFIXES = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def _step1ab(word: str) -> str:
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif word.endswith("ss"):
        pass
    elif word.endswith("s"):
        word = word[:-1]

    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
        return word

    fired = False
    if word.endswith("ed") and _has_vowel(word[:-2]):
        word = word[:-2]
        fired = True
    elif word.endswith("ing") and _has_vowel(word[:-3]):
        word = word[:-3]
        fired = True
    if fired:
        if word.endswith(("at", "bl", "iz")):
            word += "e"
        elif _ends_double_cons(word) and word[-1] not in "lsz":
            word = word[:-1]
        elif _measure(word) == 1 and _ends_cvc(word):
            word += "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _step4(word: str) -> str:
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    return word
                return stem
            return word
    return word


def _step5(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem
    if _measure(word) > 1 and _ends_double_cons(word) and word.endswith("l"):
        word = word[:-1]
    return word


def stem(word: str) -> str:
    """Return the Porter stem of a lowercase word."""
    if len(word) <= 2:
        return word
    word = _step1ab(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2_RULES)
    word = _apply_rules(word, _STEP3_RULES)
    word = _step4(word)
    word = _step5(word)
    return word
