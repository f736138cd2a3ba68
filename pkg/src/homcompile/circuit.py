"""Arithmetic circuit IR: gates, builder, evaluation, expansion, parse trees.

A circuit is a list of gates in topological order (children precede
parents), each one of

    ("input", var, None)   ("const", Fraction, None)
    ("add", left, right)   ("mul", left, right)

plus an output gate index.  Size is the number of wires (two per add/mul
gate), depth the longest chain of add/mul gates from the output to a leaf.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Union

import numpy as np

from .errors import DEFAULT_EXPAND_GUARD, FormatError, ResourceError, guard_value

INPUT, CONST, ADD, MUL = "input", "const", "add", "mul"

DEFAULT_PRIME = (1 << 61) - 1


# ---------------------------------------------------------------------------
# variables
#
# Variables are tagged tuples so they hash fast, order totally, and never
# collide across kinds.


class HostEdge(tuple):
    """x_{u,v}: an edge of the complete host graph, ``u < v``."""

    __slots__ = ()

    def __new__(cls, u: int, v: int):
        if u == v:
            raise ValueError("host edge needs distinct endpoints")
        if u > v:
            u, v = v, u
        return tuple.__new__(cls, ("x", u, v))

    u = property(lambda self: self[1])
    v = property(lambda self: self[2])

    def __repr__(self):
        return f"x[{self[1]},{self[2]}]"


class ColoredEdge(tuple):
    """x_{(i,u),(j,v)}: host vertex u of colour i joined to v of colour j, ``i < j``."""

    __slots__ = ()

    def __new__(cls, i: int, u: int, j: int, v: int):
        if i == j:
            raise ValueError("coloured edge needs distinct colours")
        if i > j:
            i, u, j, v = j, v, i, u
        return tuple.__new__(cls, ("c", i, u, j, v))

    i = property(lambda self: self[1])
    u = property(lambda self: self[2])
    j = property(lambda self: self[3])
    v = property(lambda self: self[4])

    def __repr__(self):
        return f"x[({self[1]},{self[2]}),({self[3]},{self[4]})]"


class Aux(tuple):
    """w_e: auxiliary marker variable for pattern edge ``e = {i, j}``."""

    __slots__ = ()

    def __new__(cls, i: int, j: int):
        if i == j:
            raise ValueError("aux variable needs a pattern edge")
        if i > j:
            i, j = j, i
        return tuple.__new__(cls, ("w", i, j))

    i = property(lambda self: self[1])
    j = property(lambda self: self[2])

    def __repr__(self):
        return f"w[{self[1]},{self[2]}]"


VariableId = Union[HostEdge, ColoredEdge, Aux]

_VAR_RE = [
    (re.compile(r"^x\[\((\d+),(\d+)\),\((\d+),(\d+)\)\]$"), lambda g: ColoredEdge(*map(int, g))),
    (re.compile(r"^x\[(\d+),(\d+)\]$"), lambda g: HostEdge(*map(int, g))),
    (re.compile(r"^w\[(\d+),(\d+)\]$"), lambda g: Aux(*map(int, g))),
]


def parse_variable(text: str) -> VariableId:
    for rx, make in _VAR_RE:
        mt = rx.match(text)
        if mt:
            try:
                return make(mt.groups())
            except ValueError as exc:
                raise FormatError(f"bad variable {text!r}: {exc}") from None
    raise FormatError(f"bad variable {text!r}")


# ---------------------------------------------------------------------------
# monomials and polynomial tables


class Monomial(tuple):
    """Sorted tuple of ``(variable, exponent)`` pairs; ``()`` is the constant monomial."""

    __slots__ = ()

    def __new__(cls, items=()):
        if isinstance(items, Mapping):
            pairs = items.items()
        else:
            acc: dict = {}
            for it in items:
                if isinstance(it, tuple) and len(it) == 2 and isinstance(it[1], int) and isinstance(it[0], tuple):
                    var, e = it
                else:
                    var, e = it, 1
                acc[var] = acc.get(var, 0) + e
            pairs = acc.items()
        return tuple.__new__(cls, sorted((v, e) for v, e in pairs if e))

    @classmethod
    def of(cls, *variables) -> "Monomial":
        acc: dict = {}
        for v in variables:
            acc[v] = acc.get(v, 0) + 1
        return tuple.__new__(cls, sorted(acc.items()))

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not self:
            return other
        if not other:
            return self
        acc = dict(self)
        for v, e in other:
            acc[v] = acc.get(v, 0) + e
        return tuple.__new__(Monomial, sorted(acc.items()))

    def divides(self, other: "Monomial") -> bool:
        od = dict(other)
        return all(od.get(v, 0) >= e for v, e in self)

    def exponent(self, var) -> int:
        for v, e in self:
            if v == var:
                return e
        return 0

    @property
    def degree(self) -> int:
        return sum(e for _, e in self)

    def variables(self) -> list:
        return [v for v, _ in self]

    def without(self, var, times: int = 1) -> "Monomial":
        out = []
        for v, e in self:
            if v == var:
                if e < times:
                    raise ValueError(f"{var!r} has exponent {e} < {times}")
                e -= times
            if e:
                out.append((v, e))
        return tuple.__new__(Monomial, out)

    def __repr__(self):
        if not self:
            return "1"
        return "*".join(repr(v) if e == 1 else f"{v!r}^{e}" for v, e in self)


def _norm_number(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


class PolynomialTable(dict):
    """Monomial -> non-zero coefficient."""

    @classmethod
    def from_terms(cls, terms: Iterable) -> "PolynomialTable":
        out = cls()
        for mono, c in terms:
            out.add_term(Monomial(mono) if not isinstance(mono, Monomial) else mono, c)
        return out

    def add_term(self, mono: Monomial, c) -> None:
        v = self.get(mono, 0) + c
        if v:
            self[mono] = _norm_number(v)
        else:
            self.pop(mono, None)

    def __add__(self, other: "PolynomialTable") -> "PolynomialTable":
        out = PolynomialTable(self)
        for m, c in other.items():
            out.add_term(m, c)
        return out

    def __mul__(self, other: "PolynomialTable") -> "PolynomialTable":
        out = PolynomialTable()
        for m1, c1 in self.items():
            for m2, c2 in other.items():
                out.add_term(m1 * m2, c1 * c2)
        return out

    def scale(self, c) -> "PolynomialTable":
        if c == 0:
            return PolynomialTable()
        return PolynomialTable({m: _norm_number(v * c) for m, v in self.items()})

    def derivative(self, var) -> "PolynomialTable":
        out = PolynomialTable()
        for m, c in self.items():
            e = m.exponent(var)
            if e:
                out.add_term(m.without(var), c * e)
        return out

    def substitute(self, rule: Callable) -> "PolynomialTable":
        """Apply ``rule(var) -> None | var | number`` to every variable."""
        out = PolynomialTable()
        for m, c in self.items():
            coeff, vars_ = c, []
            for v, e in m:
                r = rule(v)
                if r is None:
                    vars_.append((v, e))
                elif isinstance(r, tuple):
                    vars_.append((r, e))
                else:
                    coeff = coeff * r**e
            if coeff:
                out.add_term(Monomial(vars_), coeff)
        return out

    def evaluate(self, assignment, modulus: Optional[int] = None):
        total = 0
        for m, c in self.items():
            term = _const_value(c, modulus)
            for v, e in m:
                x = assignment[v]
                term = term * (pow(x, e, modulus) if modulus else x**e)
                if modulus:
                    term %= modulus
            total += term
            if modulus:
                total %= modulus
        return _norm_number(total)

    def monomials(self) -> list[Monomial]:
        return sorted(self)

    def variables(self) -> set:
        return {v for m in self for v, _ in m}


# ---------------------------------------------------------------------------
# circuits


@dataclass
class Validation:
    ok: bool
    gate: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _const_value(c, modulus):
    if modulus is None:
        return c
    c = Fraction(c)
    if c.denominator % modulus == 0:
        raise ValueError(f"constant {c} has no inverse modulo {modulus}")
    return c.numerator * pow(c.denominator, -1, modulus) % modulus


class Circuit:
    """An immutable gate list with a designated output."""

    __slots__ = ("gates", "output", "_cache")

    def __init__(self, gates, output: int):
        gates = tuple(gates)
        for g, (op, a, b) in enumerate(gates):
            if op in (ADD, MUL):
                if not (0 <= a < g and 0 <= b < g):
                    raise ValueError(f"gate {g}: children must precede their parent")
            elif op == CONST:
                if not isinstance(a, (int, Fraction)):
                    raise ValueError(f"gate {g}: constant must be rational")
            elif op != INPUT:
                raise ValueError(f"gate {g}: unknown op {op!r}")
        if not 0 <= output < len(gates):
            raise ValueError("output gate out of range")
        self.gates = gates
        self.output = output
        self._cache = {}

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        return isinstance(other, Circuit) and self.gates == other.gates and self.output == other.output

    def __hash__(self):
        return hash((self.gates, self.output))

    def __repr__(self):
        return f"Circuit(gates={len(self.gates)}, size={self.size()}, depth={self.depth()})"

    # -- measures ---------------------------------------------------------

    def size(self) -> int:
        return sum(2 for op, _, _ in self.gates if op in (ADD, MUL))

    def depth(self) -> int:
        if "depth" not in self._cache:
            d = [0] * len(self.gates)
            for g, (op, a, b) in enumerate(self.gates):
                if op in (ADD, MUL):
                    d[g] = 1 + (d[a] if d[a] > d[b] else d[b])
            self._cache["depth"] = d[self.output]
        return self._cache["depth"]

    def count(self, op: str) -> int:
        return sum(1 for o, _, _ in self.gates if o == op)

    def out_degrees(self) -> list[int]:
        deg = [0] * len(self.gates)
        for op, a, b in self.gates:
            if op in (ADD, MUL):
                deg[a] += 1
                deg[b] += 1
        return deg

    def variables(self) -> set:
        return {a for op, a, _ in self.gates if op == INPUT}

    def reachable(self) -> list[bool]:
        live = [False] * len(self.gates)
        live[self.output] = True
        for g in range(len(self.gates) - 1, -1, -1):
            if live[g]:
                op, a, b = self.gates[g]
                if op in (ADD, MUL):
                    live[a] = live[b] = True
        return live

    # -- flavours ---------------------------------------------------------

    def validate(self, flavor: str) -> Validation:
        """Check ``monotone``, ``skew`` or ``formula``; report the first offending gate."""
        gates = self.gates
        if flavor == "monotone":
            for g, (op, a, _) in enumerate(gates):
                if op == CONST and a < 0:
                    return Validation(False, g, f"negative constant {a}")
            return Validation(True)
        if flavor == "skew":
            for g, (op, a, b) in enumerate(gates):
                if op == MUL and gates[a][0] not in (INPUT, CONST) and gates[b][0] not in (INPUT, CONST):
                    return Validation(False, g, "multiplication of two non-leaf gates")
            return Validation(True)
        if flavor == "formula":
            for g, d in enumerate(self.out_degrees()):
                if d > 1:
                    return Validation(False, g, f"out-degree {d}")
            return Validation(True)
        raise ValueError(f"unknown flavor {flavor!r}")

    def is_formula(self) -> bool:
        return self.validate("formula").ok

    # -- evaluation -------------------------------------------------------

    def evaluate(self, assignment, modulus: Optional[int] = None):
        """Value at ``assignment`` (mapping or callable), exactly or mod ``modulus``."""
        get = assignment if callable(assignment) and not isinstance(assignment, Mapping) else None
        vals = [0] * len(self.gates)
        for g, (op, a, b) in enumerate(self.gates):
            if op == ADD:
                x = vals[a] + vals[b]
                vals[g] = x % modulus if modulus else x
            elif op == MUL:
                x = vals[a] * vals[b]
                vals[g] = x % modulus if modulus else x
            elif op == INPUT:
                try:
                    x = get(a) if get else assignment[a]
                except KeyError:
                    raise ValueError(f"no value for variable {a!r}") from None
                vals[g] = x % modulus if modulus else x
            else:
                vals[g] = _norm_number(_const_value(a, modulus))
        return _norm_number(vals[self.output])

    def _levels(self):
        """Gates grouped by depth as numpy index arrays, for vectorized evaluation."""
        if "levels" not in self._cache:
            lev = [0] * len(self.gates)
            buckets: dict[int, tuple[list, list]] = {}
            inputs, consts = [], []
            for g, (op, a, b) in enumerate(self.gates):
                if op == INPUT:
                    inputs.append(g)
                elif op == CONST:
                    consts.append(g)
                else:
                    lev[g] = 1 + max(lev[a], lev[b])
                    buckets.setdefault(lev[g], ([], []))[op == MUL].append(g)
            levels = []
            for d in sorted(buckets):
                row = []
                for ids in buckets[d]:
                    ids = np.array(ids, dtype=np.int64)
                    left = np.array([self.gates[g][1] for g in ids], dtype=np.int64)
                    right = np.array([self.gates[g][2] for g in ids], dtype=np.int64)
                    row.append((ids, left, right))
                levels.append(row)
            self._cache["levels"] = (inputs, consts, levels)
        return self._cache["levels"]

    def evaluate_vectorized(self, assignment, modulus: Optional[int] = None, machine_ints: bool = False):
        """Same value as ``evaluate``, computed level by level with numpy.

        ``machine_ints=True`` uses int64 and is only safe when the caller knows
        every gate value stays below 2^62 (e.g. Hom circuits on 0/1 inputs
        with n^k < 2^62) and all constants are integers.
        """
        inputs, consts, levels = self._levels()
        dtype = np.int64 if machine_ints and modulus is None else object
        vals = np.zeros(len(self.gates), dtype=dtype)
        get = assignment if callable(assignment) and not isinstance(assignment, Mapping) else None
        for g in inputs:
            var = self.gates[g][1]
            try:
                x = get(var) if get else assignment[var]
            except KeyError:
                raise ValueError(f"no value for variable {var!r}") from None
            vals[g] = x % modulus if modulus else x
        for g in consts:
            c = _norm_number(_const_value(self.gates[g][1], modulus))
            if dtype is np.int64 and not isinstance(c, int):
                raise ValueError("machine_ints needs integer constants")
            vals[g] = c
        for row in levels:
            for t, (ids, left, right) in enumerate(row):
                if not len(ids):
                    continue
                x = vals[left] * vals[right] if t else vals[left] + vals[right]
                vals[ids] = x % modulus if modulus else x
        out = vals[self.output]
        return _norm_number(out.item() if hasattr(out, "item") else out)

    def expand(self, guard: Optional[int] = None) -> PolynomialTable:
        """Exact coefficient table; ``ResourceError`` once any gate exceeds ``guard`` monomials."""
        guard = guard_value(DEFAULT_EXPAND_GUARD) if guard is None else guard
        live = self.reachable()
        uses = [0] * len(self.gates)
        for g, (op, a, b) in enumerate(self.gates):
            if live[g] and op in (ADD, MUL):
                uses[a] += 1
                uses[b] += 1
        tables: dict[int, PolynomialTable] = {}
        for g, (op, a, b) in enumerate(self.gates):
            if not live[g]:
                continue
            if op == INPUT:
                t = PolynomialTable({Monomial.of(a): 1})
            elif op == CONST:
                t = PolynomialTable({Monomial(): _norm_number(a)}) if a else PolynomialTable()
            elif op == ADD:
                t = tables[a] + tables[b]
            else:
                ta, tb = tables[a], tables[b]
                if len(ta) * len(tb) > guard * 4 and len(ta) > 1 and len(tb) > 1:
                    raise ResourceError(f"expansion of gate {g} exceeds guard {guard}")
                t = ta * tb
            if len(t) > guard:
                raise ResourceError(f"expansion of gate {g} has {len(t)} monomials, guard {guard}")
            tables[g] = t
            if op in (ADD, MUL):
                for c in (a, b):
                    uses[c] -= 1
                    if uses[c] == 0 and c != self.output:
                        tables.pop(c, None)
        return tables[self.output]

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"c {len(self.gates)}"]
        for g, (op, a, b) in enumerate(self.gates):
            if op == INPUT:
                lines.append(f"g {g} input {a!r}")
            elif op == CONST:
                f = Fraction(a)
                lines.append(f"g {g} const {f.numerator}/{f.denominator}")
            else:
                lines.append(f"g {g} {op} {a} {b}")
        lines.append(f"out {self.output}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        declared = None
        gates = []
        output = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "c" and len(parts) == 2:
                    declared = int(parts[1])
                elif parts[0] == "g" and len(parts) >= 3:
                    gid = int(parts[1])
                    if gid != len(gates):
                        raise FormatError(f"line {lineno}: expected gate id {len(gates)}, got {gid}")
                    op = parts[2]
                    if op == INPUT and len(parts) == 4:
                        gates.append((INPUT, parse_variable(parts[3]), None))
                    elif op == CONST and len(parts) == 4:
                        num, _, den = parts[3].partition("/")
                        value = Fraction(int(num), int(den) if den else 1)
                        gates.append((CONST, _norm_number(value), None))
                    elif op in (ADD, MUL) and len(parts) == 5:
                        gates.append((op, int(parts[3]), int(parts[4])))
                    else:
                        raise FormatError(f"line {lineno}: bad gate {line!r}")
                elif parts[0] == "out" and len(parts) == 2:
                    output = int(parts[1])
                else:
                    raise FormatError(f"line {lineno}: unrecognized line {line!r}")
            except (ValueError, ZeroDivisionError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(f"line {lineno}: {exc}") from None
        if declared is None or output is None:
            raise FormatError("circuit needs a 'c' header and an 'out' footer")
        if declared != len(gates):
            raise FormatError(f"header declares {declared} gates, found {len(gates)}")
        try:
            return cls(gates, output)
        except ValueError as exc:
            raise FormatError(str(exc)) from None


def size(C: Circuit) -> int:
    return C.size()


def depth(C: Circuit) -> int:
    return C.depth()


def validate(C: Circuit, flavor: str) -> Validation:
    return C.validate(flavor)


def evaluate(C: Circuit, assignment, modulus: Optional[int] = None):
    return C.evaluate(assignment, modulus)


def expand(C: Circuit, guard: Optional[int] = None) -> PolynomialTable:
    return C.expand(guard)


# ---------------------------------------------------------------------------
# builder


class CircuitBuilder:
    """Incremental construction with constant folding.

    With ``share=True`` structurally equal gates are merged (hash-consing);
    formulas need ``share=False`` so every gate keeps a single parent.
    Zero subtrees vanish and multiplications by one collapse.
    """

    def __init__(self, share: bool = True):
        self.share = share
        self.gates: list = []
        self.constval: dict[int, object] = {}
        self._memo: dict = {}

    def _emit(self, gate) -> int:
        if self.share:
            hit = self._memo.get(gate)
            if hit is not None:
                return hit
        g = len(self.gates)
        self.gates.append(gate)
        if self.share:
            self._memo[gate] = g
        return g

    def input(self, var) -> int:
        return self._emit((INPUT, var, None))

    def const(self, value) -> int:
        value = _norm_number(Fraction(value))
        g = self._emit((CONST, value, None))
        self.constval[g] = value
        return g

    def zero(self) -> int:
        return self.const(0)

    def one(self) -> int:
        return self.const(1)

    def is_zero(self, g: int) -> bool:
        return self.constval.get(g, None) == 0

    def add(self, a: int, b: int) -> int:
        ca, cb = self.constval.get(a), self.constval.get(b)
        if ca is not None and cb is not None:
            return self.const(ca + cb)
        if ca == 0:
            return b
        if cb == 0:
            return a
        if self.share and a > b:
            a, b = b, a
        return self._emit((ADD, a, b))

    def mul(self, a: int, b: int) -> int:
        ca, cb = self.constval.get(a), self.constval.get(b)
        if ca is not None and cb is not None:
            return self.const(ca * cb)
        if ca == 0 or cb == 0:
            return self.zero()
        if ca == 1:
            return b
        if cb == 1:
            return a
        if self.share and a > b:
            a, b = b, a
        return self._emit((MUL, a, b))

    def sum(self, ids: Iterable[int]) -> int:
        """Balanced fan-in-2 addition tree; the empty sum is 0."""
        ids = [g for g in ids if not self.is_zero(g)]
        if not ids:
            return self.zero()
        while len(ids) > 1:
            nxt = [self.add(ids[t], ids[t + 1]) for t in range(0, len(ids) - 1, 2)]
            if len(ids) % 2:
                nxt.append(ids[-1])
            ids = nxt
        return ids[0]

    def product(self, ids: Iterable[int]) -> int:
        """Balanced fan-in-2 multiplication tree; the empty product is 1."""
        ids = list(ids)
        if any(self.is_zero(g) for g in ids):
            return self.zero()
        ids = [g for g in ids if self.constval.get(g) != 1]
        if not ids:
            return self.one()
        while len(ids) > 1:
            nxt = [self.mul(ids[t], ids[t + 1]) for t in range(0, len(ids) - 1, 2)]
            if len(ids) % 2:
                nxt.append(ids[-1])
            ids = nxt
        return ids[0]

    def chain_product(self, ids: Iterable[int]) -> int:
        """Left-deep product ``((a*b)*c)*...``; keeps skewness when b, c, ... are leaves."""
        acc = self.one()
        for g in ids:
            acc = self.mul(acc, g)
        return acc

    def build(self, output: int) -> Circuit:
        """Freeze the gates reachable from ``output`` into a ``Circuit``."""
        live = [False] * len(self.gates)
        live[output] = True
        for g in range(len(self.gates) - 1, -1, -1):
            if live[g]:
                op, a, b = self.gates[g]
                if op in (ADD, MUL):
                    live[a] = live[b] = True
        remap = {}
        out = []
        for g, gate in enumerate(self.gates):
            if live[g]:
                op, a, b = gate
                if op in (ADD, MUL):
                    gate = (op, remap[a], remap[b])
                remap[g] = len(out)
                out.append(gate)
        return Circuit(out, remap[output])


def copy_into(builder: CircuitBuilder, C: Circuit) -> list[int]:
    """Replay ``C`` into ``builder``; returns the new id of every old gate."""
    ids = []
    for op, a, b in C.gates:
        if op == INPUT:
            ids.append(builder.input(a))
        elif op == CONST:
            ids.append(builder.const(a))
        elif op == ADD:
            ids.append(builder.add(ids[a], ids[b]))
        else:
            ids.append(builder.mul(ids[a], ids[b]))
    return ids


# ---------------------------------------------------------------------------
# streaming formula evaluation


def evaluate_formula_streaming(F: Circuit, assignment, modulus: int = DEFAULT_PRIME):
    """Depth-first evaluation holding one partial value per open ancestor.

    Returns ``(value, peak)`` where ``peak`` is the largest number of values
    held at once; it never exceeds ``depth(F) + 1``.
    """
    if not F.is_formula():
        raise ValueError("streaming evaluation needs a formula (all out-degrees <= 1)")
    gates = F.gates
    stack = [[F.output, 0, None]]
    result = None
    held = 0  # frames holding a left-operand value
    pending = 0  # 1 while a finished child value is waiting to be consumed
    peak = 0
    while stack:
        frame = stack[-1]
        g, stage, acc = frame
        op, a, b = gates[g]
        if op == INPUT:
            try:
                result = assignment[a] % modulus
            except KeyError:
                raise ValueError(f"no value for variable {a!r}") from None
            stack.pop()
            pending = 1
        elif op == CONST:
            result = _const_value(a, modulus)
            stack.pop()
            pending = 1
        elif stage == 0:
            frame[1] = 1
            stack.append([a, 0, None])
        elif stage == 1:
            frame[2] = result
            held += 1
            pending = 0
            frame[1] = 2
            stack.append([b, 0, None])
        else:
            result = (acc + result if op == ADD else acc * result) % modulus
            held -= 1
            stack.pop()
            pending = 1
        if held + pending > peak:
            peak = held + pending
    return result, peak


# ---------------------------------------------------------------------------
# parse trees


@dataclass(frozen=True)
class ParseNode:
    """One occurrence of a gate in a parse tree."""

    gate: int
    children: tuple = ()

    def nodes(self):
        """All occurrences, children before parents (post-order)."""
        out, stack = [], [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
            else:
                stack.append((node, True))
                for c in reversed(node.children):
                    stack.append((c, False))
        return out

    def gates(self) -> set[int]:
        return {n.gate for n in self.nodes()}

    def term(self, C: Circuit):
        """(constant, monomial) produced by this parse tree."""
        coeff, vars_ = 1, []
        for node in self.nodes():
            op, a, _ = C.gates[node.gate]
            if op == INPUT:
                vars_.append(a)
            elif op == CONST:
                coeff *= a
        return coeff, Monomial.of(*vars_)


class DivisorSpace:
    """Packed encoding of the divisors of a fixed monomial ``m``.

    Each variable of ``m`` owns a bit field wide enough that adding two
    codes never carries between fields; a biased add exposes any field that
    overshoots its exponent in ``m``.
    """

    def __init__(self, m: Monomial):
        self.monomial = m
        self.offset: dict = {}
        self.caps = []
        bias = top = 0
        off = 0
        for v, e in m:
            w = (2 * e).bit_length() + 1
            self.offset[v] = off
            self.caps.append((v, off, w, e))
            bias |= ((1 << (w - 1)) - 1 - e) << off
            top |= 1 << (off + w - 1)
            off += w
        self.bias, self.top = bias, top
        self.full = sum(e << self.offset[v] for v, e in m)

    def leaf(self, var) -> Optional[int]:
        off = self.offset.get(var)
        return None if off is None else 1 << off

    def combine(self, a: int, b: int) -> Optional[int]:
        s = a + b
        return None if (s + self.bias) & self.top else s

    def decode(self, code: int) -> Monomial:
        return Monomial([(v, (code >> off) & ((1 << w) - 1)) for v, off, w, _ in self.caps])


def producible(C: Circuit, space: DivisorSpace) -> list[set]:
    """For each gate, the divisors of ``space.monomial`` some parse tree at that gate yields."""
    S: list[set] = []
    for op, a, b in C.gates:
        if op == INPUT:
            code = space.leaf(a)
            S.append({code} if code is not None else set())
        elif op == CONST:
            S.append({0} if a != 0 else set())
        elif op == ADD:
            S.append(S[a] | S[b])
        else:
            out = set()
            sb = S[b]
            if S[a] and sb:
                for x in S[a]:
                    for y in sb:
                        z = space.combine(x, y)
                        if z is not None:
                            out.add(z)
            S.append(out)
    return S


def find_parse_tree(C: Circuit, m: Monomial) -> Optional[ParseNode]:
    """A parse tree whose leaf product is ``m`` (up to its constant), or ``None``."""
    space = DivisorSpace(m)
    S = producible(C, space)
    if space.full not in S[C.output]:
        return None

    def build(g: int, code: int) -> ParseNode:
        op, a, b = C.gates[g]
        if op in (INPUT, CONST):
            return ParseNode(g)
        if op == ADD:
            return ParseNode(g, (build(a if code in S[a] else b, code),))
        for x in sorted(S[a]):
            y = code - x
            if y in S[b] and space.combine(x, y) == code:
                return ParseNode(g, (build(a, x), build(b, y)))
        raise AssertionError("inconsistent producible sets")

    limit = sys.getrecursionlimit()
    need = C.depth() + 100
    if need > limit:
        sys.setrecursionlimit(need)
    try:
        return build(C.output, space.full)
    finally:
        sys.setrecursionlimit(limit)


# ---------------------------------------------------------------------------
# rewriting: substitution and derivatives


def substitute(C: Circuit, rule) -> Circuit:
    """Rewrite inputs gate-locally.

    ``rule`` maps a variable (callable or mapping) to ``None`` (keep), another
    variable, a number, or a tuple of variables whose product replaces it.
    Formulas stay formulas: each replacement gets fresh gates.
    """
    get = rule.get if isinstance(rule, Mapping) else rule
    builder = CircuitBuilder(share=not C.is_formula())
    ids = []
    for op, a, b in C.gates:
        if op == INPUT:
            r = get(a)
            if r is None:
                ids.append(builder.input(a))
            elif isinstance(r, (HostEdge, ColoredEdge, Aux)):
                ids.append(builder.input(r))
            elif isinstance(r, tuple):
                ids.append(builder.chain_product(builder.input(v) for v in r))
            else:
                ids.append(builder.const(r))
        elif op == CONST:
            ids.append(builder.const(a))
        elif op == ADD:
            ids.append(builder.add(ids[a], ids[b]))
        else:
            ids.append(builder.mul(ids[a], ids[b]))
    return builder.build(ids[C.output])


def partial_derivative(C: Circuit, var) -> Circuit:
    """Circuit for d(C)/d(var) by the sum and product rules (shares subcircuits)."""
    builder = CircuitBuilder(share=True)
    f = copy_into(builder, C)
    d: list[Optional[int]] = []
    for op, a, b in C.gates:
        if op == INPUT:
            d.append(builder.one() if a == var else None)
        elif op == CONST:
            d.append(None)
        elif op == ADD:
            da, db = d[a], d[b]
            if da is None:
                d.append(db)
            elif db is None:
                d.append(da)
            else:
                d.append(builder.add(da, db))
        else:
            terms = []
            if d[b] is not None:
                terms.append(builder.mul(f[a], d[b]))
            if d[a] is not None:
                terms.append(builder.mul(d[a], f[b]))
            d.append(builder.sum(terms) if terms else None)
    out = d[C.output]
    return builder.build(builder.zero() if out is None else out)


def fold_constants(C: Circuit) -> Circuit:
    """Rebuild ``C`` so zero subtrees vanish and constant subtrees become single leaves."""
    builder = CircuitBuilder(share=not C.is_formula())
    ids = copy_into(builder, C)
    return builder.build(ids[C.output])


def partial_derivative_formula(F: Circuit, var) -> Circuit:
    """Derivative of a monotone formula, duplicating subformulas so the result is a formula."""
    if not F.validate("monotone"):
        raise ValueError("formula derivative needs a monotone formula")
    if not F.is_formula():
        raise ValueError("partial_derivative_formula needs a formula; use partial_derivative")
    F = fold_constants(F)
    gates = F.gates
    builder = CircuitBuilder(share=False)

    def copy(g: int) -> int:
        # post-order replay of the subformula at g with fresh gates
        new: dict[int, int] = {}
        stack = [(g, False)]
        while stack:
            h, done = stack.pop()
            op, a, b = gates[h]
            if op == INPUT:
                new[h] = builder.input(a)
            elif op == CONST:
                new[h] = builder.const(a)
            elif not done:
                stack.append((h, True))
                stack.append((b, False))
                stack.append((a, False))
            elif op == ADD:
                new[h] = builder.add(new[a], new[b])
            else:
                new[h] = builder.mul(new[a], new[b])
        return new[g]

    d: list[Optional[int]] = []
    for op, a, b in gates:
        if op == INPUT:
            d.append(builder.one() if a == var else None)
        elif op == CONST:
            d.append(None)
        elif op == ADD:
            da, db = d[a], d[b]
            d.append(db if da is None else da if db is None else builder.add(da, db))
        else:
            terms = []
            if d[b] is not None:
                terms.append(builder.mul(copy(a), d[b]))
            if d[a] is not None:
                terms.append(builder.mul(d[a], copy(b)))
            d.append(None if not terms else terms[0] if len(terms) == 1 else builder.add(*terms))
    out = d[F.output]
    return builder.build(builder.zero() if out is None else out)


# ---------------------------------------------------------------------------
# assignments


class HostIndicator(Mapping):
    """0/1 assignment of a host graph: ``x[u,v]`` and ``x[(i,u),(j,v)]`` read edge ``{u,v}``."""

    def __init__(self, G):
        self.G = G

    def __getitem__(self, var):
        tag = var[0]
        if tag == "x":
            return 1 if (var[1], var[2]) in self.G.edges else 0
        if tag == "c":
            u, v = var[2], var[4]
            return 1 if u != v and ((u, v) if u < v else (v, u)) in self.G.edges else 0
        raise KeyError(var)

    def __iter__(self):
        return iter(HostEdge(u, v) for u, v in sorted(self.G.edges))

    def __len__(self):
        return len(self.G.edges)


def single_input(var) -> Circuit:
    return Circuit([(INPUT, var, None)], 0)
