"""Feature-name grammar.

::

    feature := "LT" | "MAC" | "dV" lm | "K" lm | "S" ("1"|"2"|"3") | delay | "R" delay delay
    delay   := "LT" | "L" lm lm
    lm      := ("p"|"v") ("1"|"2"|"3")

so ``RLp1v2Lp1p2`` is the ratio of the p1->v2 latency to the p1->p2 latency and
``RLTLp1p3`` divides the ECG-to-foot latency by the p1->p3 latency.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

LANDMARKS = ("v1", "p1", "v2", "p2", "v3", "p3")
KINDS = ("latency", "lt", "ratio", "amplitude", "curvature", "slope", "mac")


@dataclass(frozen=True)
class FeatureSpec:
    kind: str
    operands: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @property
    def name(self) -> str:
        return serialize(self)

    def __str__(self) -> str:
        return serialize(self)


def latency(a: str, b: str) -> FeatureSpec:
    return FeatureSpec("latency", (a, b))


LT = FeatureSpec("lt")
MAC = FeatureSpec("mac")


def ratio(num: FeatureSpec, den: FeatureSpec) -> FeatureSpec:
    return FeatureSpec("ratio", (num, den))


def serialize(spec: FeatureSpec) -> str:
    k, ops = spec.kind, spec.operands
    if k == "lt":
        return "LT"
    if k == "mac":
        return "MAC"
    if k == "latency":
        return "L" + ops[0] + ops[1]
    if k == "amplitude":
        return "dV" + ops[0]
    if k == "curvature":
        return "K" + ops[0]
    if k == "slope":
        return f"S{ops[0]}"
    return "R" + serialize(ops[0]) + serialize(ops[1])


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, reason: str = "invalid token"):
        raise ParseError(self.text, self.pos, reason)

    def peek(self, n: int = 1) -> str:
        return self.text[self.pos: self.pos + n]

    def take(self, s: str) -> bool:
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def landmark(self) -> str:
        tok = self.peek(2)
        if len(tok) == 2 and tok[0] in "pv" and tok[1] in "123":
            self.pos += 2
            return tok
        self.fail("expected landmark p1..p3 or v1..v3")

    def delay(self) -> FeatureSpec:
        if not self.take("L"):
            self.fail("expected delay")
        if self.take("T"):
            return LT
        a = self.landmark()
        b = self.landmark()
        return latency(a, b)

    def feature(self) -> FeatureSpec:
        if self.take("MAC"):
            return MAC
        if self.take("dV"):
            return FeatureSpec("amplitude", (self.landmark(),))
        if self.take("K"):
            return FeatureSpec("curvature", (self.landmark(),))
        if self.take("S"):
            c = self.peek()
            if c and c in "123":
                self.pos += 1
                return FeatureSpec("slope", (int(c),))
            self.fail("expected rising-edge index 1..3")
        if self.take("R"):
            num = self.delay()
            den = self.delay()
            return ratio(num, den)
        if self.peek() == "L":
            return self.delay()
        self.fail()


def parse_feature_name(name: str) -> FeatureSpec:
    p = _Parser(name)
    spec = p.feature()
    if p.pos != len(name):
        p.fail("trailing characters")
    return spec
