"""Terms, identities, the Bol-Moufang ``Xij`` codec, and brute-force evaluation.

Terms are written with juxtaposition for the product, so ``x((yy)z)`` is
``x * ((y * y) * z)``.  A run of juxtaposed factors associates to the left
(``xyz`` means ``(xy)z``).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

VARIABLES = ("x", "y", "z")
LETTERS = "ABCDEF"

# variable pattern per letter (left-to-right leaf sequence)
PATTERNS = {
    "A": "xxyz",
    "B": "xyxz",
    "C": "xyyz",
    "D": "xyzx",
    "E": "xyzy",
    "F": "xyzz",
}

# parenthesization per digit, as a nested tuple of leaf positions
BRACKETINGS = {
    1: (0, (1, (2, 3))),
    2: (0, ((1, 2), 3)),
    3: ((0, 1), (2, 3)),
    4: ((0, (1, 2)), 3),
    5: (((0, 1), 2), 3),
}

LETTER_DUAL = {"A": "F", "B": "E", "C": "C", "D": "D", "E": "B", "F": "A"}
DIGIT_DUAL = {1: 5, 2: 4, 3: 3, 4: 2, 5: 1}


class TermError(ValueError):
    """Raised for malformed terms, identities or codes."""


class EvaluationError(ValueError):
    """Raised when a term cannot be evaluated in a given magma."""


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise TermError(f"variable {self.name!r} not in {VARIABLES}")


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Inv:
    child: "Term"


@dataclass(frozen=True)
class Prod:
    left: "Term"
    right: "Term"


Term = Union[Var, One, Inv, Prod]


def render(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, One):
        return "1"
    if isinstance(term, Inv):
        inner = render(term.child)
        if isinstance(term.child, Prod):
            inner = f"({inner})"
        return inner + "^-1"
    parts = []
    for side in (term.left, term.right):
        s = render(side)
        parts.append(f"({s})" if isinstance(side, Prod) else s)
    return "".join(parts)


def leaves(term: Term) -> list[str]:
    """Variable names in left-to-right reading order."""
    if isinstance(term, Var):
        return [term.name]
    if isinstance(term, One):
        return []
    if isinstance(term, Inv):
        return leaves(term.child)
    return leaves(term.left) + leaves(term.right)


def variables(term: Term) -> set[str]:
    return set(leaves(term))


def mirror(term: Term) -> Term:
    """Swap the factors of every product (the term read in the opposite magma)."""
    if isinstance(term, Prod):
        return Prod(mirror(term.right), mirror(term.left))
    if isinstance(term, Inv):
        return Inv(mirror(term.child))
    return term


def rename(term: Term, mapping: Mapping[str, str]) -> Term:
    if isinstance(term, Var):
        return Var(mapping.get(term.name, term.name))
    if isinstance(term, Prod):
        return Prod(rename(term.left, mapping), rename(term.right, mapping))
    if isinstance(term, Inv):
        return Inv(rename(term.child, mapping))
    return term


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term
    tag: Optional[str] = None

    def __str__(self):
        return f"{render(self.lhs)} = {render(self.rhs)}"

    @property
    def variables(self) -> list[str]:
        """Distinct variables, sorted in alphabet order."""
        used = variables(self.lhs) | variables(self.rhs)
        return [v for v in VARIABLES if v in used]

    def same_equation(self, other: "Identity") -> bool:
        """Equal as an unordered pair of terms (tags ignored)."""
        return {self.lhs, self.rhs} == {other.lhs, other.rhs}


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<var>[xyz])|(?P<one>1)|(?P<inv>\^-1|'|⁻¹)|(?P<op>[()=*·]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TermError(f"unexpected character {text[pos]!r} at position {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, msg):
        tok = self.peek()
        pos = tok[2] if tok else len(self.text)
        raise TermError(f"{msg} at position {pos} in {self.text!r}")

    def product(self) -> Term:
        factors = [self.factor()]
        while True:
            tok = self.peek()
            if tok and tok[1] in ("*", "·"):
                self.i += 1
                factors.append(self.factor())
            elif tok and (tok[0] in ("var", "one") or tok[1] == "("):
                factors.append(self.factor())
            else:
                break
        term = factors[0]
        for f in factors[1:]:
            term = Prod(term, f)
        return term

    def factor(self) -> Term:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        kind, value, _ = tok
        if kind == "var":
            self.i += 1
            term: Term = Var(value)
        elif kind == "one":
            self.i += 1
            term = One()
        elif value == "(":
            self.i += 1
            term = self.product()
            if self.peek() is None or self.peek()[1] != ")":
                self.error("expected ')'")
            self.i += 1
        else:
            self.error(f"unexpected {value!r}")
        while self.peek() and self.peek()[0] == "inv":
            self.i += 1
            term = Inv(term)
        return term


def parse_term(text: str) -> Term:
    p = _Parser(text)
    term = p.product()
    if p.peek() is not None:
        p.error("trailing input")
    return term


def parse_identity(text: str, tag: Optional[str] = None) -> Identity:
    """Parse ``"lhs = rhs"`` written with juxtaposition, e.g. ``"x(yz) = (xy)z"``."""
    p = _Parser(text)
    lhs = p.product()
    tok = p.peek()
    if tok is None or tok[1] != "=":
        p.error("expected '='")
    p.i += 1
    rhs = p.product()
    if p.peek() is not None:
        p.error("trailing input")
    return Identity(lhs, rhs, tag)


# ---------------------------------------------------------------- Xij codec


@dataclass(frozen=True, order=True)
class BMCode:
    letter: str
    i: int
    j: int

    def __post_init__(self):
        if self.letter not in LETTERS:
            raise TermError(f"bad letter {self.letter!r}: expected one of {LETTERS}")
        for name in ("i", "j"):
            d = getattr(self, name)
            if d not in BRACKETINGS:
                raise TermError(f"bad bracketing digit {d!r} for {name}: expected 1..5")
        if not self.i < self.j:
            raise TermError(f"bracketing digits must satisfy i < j, got {self.i}{self.j}")

    def __str__(self):
        return f"{self.letter}{self.i}{self.j}"

    @classmethod
    def parse(cls, text: str) -> "BMCode":
        s = text.strip()
        if len(s) != 3:
            raise TermError(f"code {text!r} must be a letter followed by two digits")
        letter = s[0].upper()
        if letter not in LETTERS:
            raise TermError(f"bad letter {s[0]!r} at position 0 in {text!r}")
        digits = []
        for pos in (1, 2):
            if s[pos] not in "12345":
                raise TermError(f"bad bracketing digit {s[pos]!r} at position {pos} in {text!r}")
            digits.append(int(s[pos]))
        if digits[0] >= digits[1]:
            raise TermError(f"bracketing digits must satisfy i < j in {text!r}")
        return cls(letter, digits[0], digits[1])

    def dual(self) -> "BMCode":
        return BMCode(LETTER_DUAL[self.letter], DIGIT_DUAL[self.j], DIGIT_DUAL[self.i])


def _build(shape, pattern: str) -> Term:
    if isinstance(shape, int):
        return Var(pattern[shape])
    return Prod(_build(shape[0], pattern), _build(shape[1], pattern))


def _shape(term: Term, counter: list[int]):
    if isinstance(term, Var):
        k = counter[0]
        counter[0] += 1
        return k
    if isinstance(term, Prod):
        return (_shape(term.left, counter), _shape(term.right, counter))
    raise TermError("Bol-Moufang terms contain only variables and products")


def _bracketing_of(term: Term) -> int:
    shape = _shape(term, [0])
    for digit, s in BRACKETINGS.items():
        if s == shape:
            return digit
    raise TermError(f"{render(term)} is not a product of four factors")


def decode_bm(code: Union[BMCode, str]) -> Identity:
    if isinstance(code, str):
        code = BMCode.parse(code)
    pattern = PATTERNS[code.letter]
    return Identity(_build(BRACKETINGS[code.i], pattern), _build(BRACKETINGS[code.j], pattern), str(code))


def normalize_variables(identity: Identity) -> Identity:
    """Rename variables so they first appear as x, y, z reading the lhs."""
    order = list(dict.fromkeys(leaves(identity.lhs) + leaves(identity.rhs)))
    if len(order) > len(VARIABLES):
        raise TermError("too many variables")
    mapping = dict(zip(order, VARIABLES))
    return Identity(rename(identity.lhs, mapping), rename(identity.rhs, mapping), identity.tag)


def encode_bm(identity: Identity) -> BMCode:
    """Code of a Bol-Moufang identity, after renaming variables left to right."""
    ident = normalize_variables(identity)
    left, right = leaves(ident.lhs), leaves(ident.rhs)
    if left != right:
        raise TermError(f"{ident}: sides do not read the same variables in the same order")
    word = "".join(left)
    letter = next((k for k, v in PATTERNS.items() if v == word), None)
    if letter is None:
        raise TermError(f"{ident}: variable pattern {word!r} is not of Bol-Moufang type")
    i, j = _bracketing_of(ident.lhs), _bracketing_of(ident.rhs)
    if i == j:
        raise TermError(f"{ident}: both sides are bracketed alike, not an i<j pair")
    if i > j:
        raise TermError(f"{ident}: lhs bracketing {i} exceeds rhs bracketing {j}; swap the sides")
    return BMCode(letter, i, j)


def is_bol_moufang(identity: Identity) -> bool:
    try:
        encode_bm(identity)
    except TermError:
        return False
    return True


def all_codes() -> list[BMCode]:
    return [BMCode(letter, i, j) for letter in LETTERS for i, j in itertools.combinations(range(1, 6), 2)]


def enumerate_bm() -> list[Identity]:
    return [decode_bm(c) for c in all_codes()]


def dual_identity(identity: Identity) -> Identity:
    """Mirror image: read every product in the opposite order.

    Variables are renamed back to left-to-right order.  Bol-Moufang identities
    also get their sides swapped so the smaller bracketing stays on the left.
    """
    lhs, rhs = mirror(identity.lhs), mirror(identity.rhs)
    bm = is_bol_moufang(identity)
    if bm:
        lhs, rhs = rhs, lhs
    tag = None
    if identity.tag is not None:
        tag = DUAL_TAGS.get(identity.tag)
    dual = normalize_variables(Identity(lhs, rhs, tag))
    if bm:
        return Identity(dual.lhs, dual.rhs, tag or str(encode_bm(dual)))
    return dual


# ---------------------------------------------------------------- named identities

_NAMED_CODES = {"LB": "B14", "RB": "E25", "M1": "B15", "M2": "E15", "M3": "D23", "M4": "D34", "C": "C15"}
_NAMED_TERMS = {
    "LA": "x(xy) = (xx)y",
    "RA": "x(yy) = (xy)y",
    "FLEX": "(xy)x = x(yx)",
    "ASSOC": "x(yz) = (xy)z",
}
NAMED = tuple(_NAMED_TERMS) + tuple(_NAMED_CODES)

DUAL_TAGS = {"LA": "RA", "RA": "LA", "FLEX": "FLEX", "ASSOC": "ASSOC", "LB": "RB", "RB": "LB",
             "M1": "M2", "M2": "M1", "M3": "M4", "M4": "M3", "C": "C"}


def named_identity(tag: str) -> Identity:
    key = tag.strip().upper()
    if key in _NAMED_CODES:
        ident = decode_bm(_NAMED_CODES[key])
        return Identity(ident.lhs, ident.rhs, key)
    if key in _NAMED_TERMS:
        return parse_identity(_NAMED_TERMS[key], key)
    raise TermError(f"unknown identity name {tag!r}")


def resolve_identity(text: str) -> Identity:
    """A named tag (LB, M3, ASSOC, ...), an Xij code, or an explicit equation."""
    s = text.strip()
    if s.upper() in NAMED:
        return named_identity(s)
    if "=" in s:
        return parse_identity(s)
    return decode_bm(s)


def label(identity: Identity) -> str:
    if identity.tag:
        return identity.tag
    if is_bol_moufang(identity):
        return str(encode_bm(identity))
    return str(identity)


# ---------------------------------------------------------------- evaluation


def eval_term(term: Term, magma, assignment: Mapping[str, int], neutral: Optional[int] = None,
              inverse: Optional[Mapping[int, int]] = None) -> int:
    """Value of ``term`` in ``magma`` (row = left factor).

    ``neutral`` and ``inverse`` supply the interpretation of ``1`` and ``^-1``;
    when omitted they are taken from the magma's two-sided structure if any.
    """
    if isinstance(term, Var):
        try:
            return assignment[term.name]
        except KeyError:
            raise EvaluationError(f"variable {term.name} is unassigned") from None
    if isinstance(term, Prod):
        a = eval_term(term.left, magma, assignment, neutral, inverse)
        b = eval_term(term.right, magma, assignment, neutral, inverse)
        return magma.table[a][b]
    if isinstance(term, One):
        if neutral is None:
            neutral = magma.neutral
        if neutral is None:
            raise EvaluationError("term uses 1 but the magma has no two-sided neutral element")
        return neutral
    if inverse is None:
        inverse = magma.inverse_map
    if inverse is None:
        raise EvaluationError("term uses an inverse but the magma has no two-sided inverses")
    return inverse[eval_term(term.child, magma, assignment, neutral, inverse)]


def counterexample(identity: Identity, magma, neutral=None, inverse=None) -> Optional[dict[str, int]]:
    """First falsifying assignment in lexicographic order, or None."""
    names = identity.variables
    for values in itertools.product(range(magma.order), repeat=len(names)):
        env = dict(zip(names, values))
        if eval_term(identity.lhs, magma, env, neutral, inverse) != eval_term(identity.rhs, magma, env, neutral, inverse):
            return env
    return None


def holds(identity: Identity, magma, neutral=None, inverse=None) -> bool:
    return counterexample(identity, magma, neutral, inverse) is None
