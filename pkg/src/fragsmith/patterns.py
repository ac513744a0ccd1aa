"""Compact substructure pattern language over molecular graphs.

Supports the subset of SMARTS-style syntax the shipped rule tables use:

* atom primitives: element symbols (``C``, ``Cl``, aromatic ``c``/``n``/...),
  ``#n`` atomic number, ``*`` any, ``a``/``A`` aromatic/aliphatic,
  ``D<n>`` heavy-atom degree, ``H<n>`` total hydrogens, ``R``/``R0`` ring
  membership, ``+``/``-`` charges, ``!`` negation, ``$(...)`` recursive
  match, with ``;`` (low AND), ``,`` (OR) and ``&``/juxtaposition (high AND);
* bond primitives: ``-`` ``=`` ``#`` ``:`` ``~`` plus ``@``/``!@`` ring
  constraints, combinable with ``;``/``&`` and ``,``; an unspecified bond
  means single-or-aromatic;
* branches and single-digit ring closures.

Patterns are matched anchored: the first pattern atom maps onto a chosen
molecule atom, remaining atoms are assigned by backtracking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .elements import ATOMIC_NUMBERS
from .molgraph import AROMATIC, DOUBLE, Molecule, SINGLE, TRIPLE

AtomTest = Callable[[Molecule, int], bool]
BondTest = Callable[[Molecule, int], bool]


class PatternError(ValueError):
    pass


@dataclass
class _Node:
    test: AtomTest
    anchor: tuple[int, BondTest] | None = None  # parent node index + bond test
    extra: list[tuple[int, BondTest]] = field(default_factory=list)


@dataclass
class Pattern:
    """Compiled pattern; match with :func:`match_at` / :func:`has_match`.

    ``root_element``/``root_aromatic``, when set, are a sound prefilter:
    only atoms with that element (and aromatic flag) can anchor a match.
    """

    nodes: list[_Node]
    text: str
    root_element: str | None = None
    root_aromatic: bool | None = None

    def __len__(self) -> int:
        return len(self.nodes)


def _atomic_number(m: Molecule, idx: int) -> int:
    return ATOMIC_NUMBERS.get(m.atoms[idx].element, -1)


def _bond_order_test(order: str) -> BondTest:
    return lambda m, bi: m.bonds[bi].order == order


def _bond_single_or_aromatic(m: Molecule, bi: int) -> bool:
    return m.bonds[bi].order in (SINGLE, AROMATIC)


_BOND_PRIMS: dict[str, BondTest] = {
    "-": _bond_order_test(SINGLE),
    "=": _bond_order_test(DOUBLE),
    "#": _bond_order_test(TRIPLE),
    ":": _bond_order_test(AROMATIC),
    "~": lambda m, bi: True,
    "@": lambda m, bi: bi in m.ring_bonds,
}


def _compile_bond(expr: str) -> BondTest:
    if not expr:
        return _bond_single_or_aromatic
    groups = [g for g in expr.replace("&", ";").split(";") if g != ""]
    tests: list[BondTest] = []
    for g in groups:
        alts: list[BondTest] = []
        for alt in g.split(","):
            neg = False
            while alt.startswith("!"):
                neg = not neg
                alt = alt[1:]
            if alt not in _BOND_PRIMS:
                raise PatternError(f"bad bond primitive {alt!r}")
            base = _BOND_PRIMS[alt]
            alts.append((lambda m, bi, b=base: not b(m, bi)) if neg else base)
        tests.append(
            alts[0] if len(alts) == 1
            else (lambda m, bi, aa=tuple(alts): any(t(m, bi) for t in aa))
        )
    if len(tests) == 1:
        return tests[0]
    return lambda m, bi, tt=tuple(tests): all(t(m, bi) for t in tt)


def _elem_test(symbol: str, aromatic: bool | None) -> AtomTest:
    def test(m: Molecule, idx: int) -> bool:
        a = m.atoms[idx]
        if a.element != symbol:
            return False
        return aromatic is None or a.aromatic == aromatic

    return test


def _scan_primitive(expr: str, i: int, in_bracket: bool = True) -> tuple[AtomTest, int]:
    ch = expr[i]
    if ch == "*":
        return (lambda m, idx: True), i + 1
    if ch == "a":
        return (lambda m, idx: m.atoms[idx].aromatic), i + 1
    if ch == "A":
        return (lambda m, idx: not m.atoms[idx].aromatic), i + 1
    if ch == "#":
        j = i + 1
        while j < len(expr) and expr[j].isdigit():
            j += 1
        if j == i + 1:
            raise PatternError(f"'#' needs digits in {expr!r}")
        num = int(expr[i + 1 : j])
        return (lambda m, idx, n=num: _atomic_number(m, idx) == n), j
    if ch == "D":
        j = i + 1
        while j < len(expr) and expr[j].isdigit():
            j += 1
        if j == i + 1:
            raise PatternError(f"'D' needs a digit in {expr!r}")
        num = int(expr[i + 1 : j])
        return (lambda m, idx, n=num: m.degree(idx) == n), j
    if ch == "H":
        j = i + 1
        while j < len(expr) and expr[j].isdigit():
            j += 1
        num = int(expr[i + 1 : j]) if j > i + 1 else 1
        return (lambda m, idx, n=num: m.atoms[idx].h_total == n), j
    if ch == "R":
        if i + 1 < len(expr) and expr[i + 1] == "0":
            return (lambda m, idx: idx not in m.ring_atoms), i + 2
        return (lambda m, idx: idx in m.ring_atoms), i + 1
    if ch in "+-":
        sign = 1 if ch == "+" else -1
        j = i + 1
        if j < len(expr) and expr[j].isdigit():
            k = j
            while k < len(expr) and expr[k].isdigit():
                k += 1
            val = sign * int(expr[j:k])
            return (lambda m, idx, v=val: m.atoms[idx].formal_charge == v), k
        count = 1
        while j < len(expr) and expr[j] == ch:
            count += 1
            j += 1
        val = sign * count
        return (lambda m, idx, v=val: m.atoms[idx].formal_charge == v), j
    if ch == "$":
        if i + 1 >= len(expr) or expr[i + 1] != "(":
            raise PatternError(f"'$' needs '(...)' in {expr!r}")
        depth = 0
        j = i + 1
        while j < len(expr):
            if expr[j] == "(":
                depth += 1
            elif expr[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        if depth != 0:
            raise PatternError(f"unbalanced '$(' in {expr!r}")
        sub = compile_pattern(expr[i + 2 : j])
        return (lambda m, idx, p=sub: match_at(p, m, idx)), j + 1
    if ch.isupper():
        two = expr[i : i + 2]
        # Outside brackets only Cl/Br are two-letter symbols ("Sc" is
        # sulfur followed by an aromatic carbon).
        if len(two) == 2 and two[1].islower() and two in ATOMIC_NUMBERS:
            if in_bracket or two in ("Cl", "Br"):
                return _elem_test(two, False), i + 2
        if ch in ATOMIC_NUMBERS:
            return _elem_test(ch, False), i + 1
        raise PatternError(f"unknown element {ch!r} in {expr!r}")
    if ch.islower():
        sym = ch.upper()
        if sym in ATOMIC_NUMBERS:
            return _elem_test(sym, True), i + 1
        raise PatternError(f"unknown aromatic element {ch!r} in {expr!r}")
    raise PatternError(f"bad atom primitive at {expr[i:]!r}")


def _compile_atom_expr(expr: str) -> AtomTest:
    """Compile a bracket atom expression honoring !, &, ',' and ';'."""
    # Tokenize into primitives and separators, respecting $() nesting.
    items: list[tuple[str, AtomTest | None]] = []
    i = 0
    while i < len(expr):
        ch = expr[i]
        if ch in ";,&":
            items.append((ch, None))
            i += 1
            continue
        neg = False
        while i < len(expr) and expr[i] == "!":
            neg = not neg
            i += 1
        if i >= len(expr):
            raise PatternError(f"dangling '!' in {expr!r}")
        test, i = _scan_primitive(expr, i)
        if neg:
            test = (lambda m, idx, t=test: not t(m, idx))
        items.append(("prim", test))
    # ';' splits AND groups; ',' splits OR alternatives inside a group;
    # adjacent/&-joined primitives AND together inside an alternative.
    groups: list[list[list[AtomTest]]] = [[[]]]
    for kind, test in items:
        if kind == ";":
            groups.append([[]])
        elif kind == ",":
            groups[-1].append([])
        elif kind == "&":
            continue
        else:
            groups[-1][-1].append(test)
    and_tests: list[AtomTest] = []
    for group in groups:
        alts: list[AtomTest] = []
        for seq in group:
            if not seq:
                raise PatternError(f"empty term in {expr!r}")
            if len(seq) == 1:
                alts.append(seq[0])
            else:
                alts.append(lambda m, idx, ss=tuple(seq): all(t(m, idx) for t in ss))
        if len(alts) == 1:
            and_tests.append(alts[0])
        else:
            and_tests.append(lambda m, idx, aa=tuple(alts): any(t(m, idx) for t in aa))
    if len(and_tests) == 1:
        return and_tests[0]
    return lambda m, idx, tt=tuple(and_tests): all(t(m, idx) for t in tt)


def _root_hint(text: str) -> tuple[str | None, bool | None]:
    """Element the first pattern atom is pinned to, if any.

    Valid only when the leading primitive is an element symbol that is
    AND-combined with whatever follows (no top-level ',' before the first
    ';' or the bracket close)."""
    if text.startswith("["):
        depth = 0
        head = ""
        for ch in text[1:]:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0:
                if ch in ";]":
                    break
                if ch == ",":
                    return None, None
                head += ch
        body = head
    else:
        body = text
    if text.startswith("["):
        m = re.match(r"(Cl|Br|[A-Z][a-z]?)", body)
    else:
        m = re.match(r"(Cl|Br|[A-Z])", body)
    if m and m.group(1) in ATOMIC_NUMBERS:
        return m.group(1), False
    m = re.match(r"([bcnops])", body)
    if m:
        return m.group(1).upper(), True
    return None, None


def compile_pattern(text: str) -> Pattern:
    """Compile pattern text into a matchable structure."""
    nodes: list[_Node] = []
    prev: int | None = None
    pending = ""
    branch_stack: list[int] = []
    ring_open: dict[int, tuple[int, str]] = {}
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            depth = 1
            j = i + 1
            while j < n and depth:
                if text[j] == "[":
                    depth += 1
                elif text[j] == "]":
                    depth -= 1
                j += 1
            if depth:
                raise PatternError(f"unterminated '[' in {text!r}")
            test = _compile_atom_expr(text[i + 1 : j - 1])
            i = j
        elif ch in "-=#:~@!":
            pending += ch
            i += 1
            continue
        elif ch in ";,&":
            pending += ch
            i += 1
            continue
        elif ch == "(":
            if prev is None:
                raise PatternError(f"branch before atom in {text!r}")
            branch_stack.append(prev)
            i += 1
            continue
        elif ch == ")":
            if not branch_stack:
                raise PatternError(f"unmatched ')' in {text!r}")
            prev = branch_stack.pop()
            i += 1
            continue
        elif ch.isdigit():
            num = int(ch)
            if prev is None:
                raise PatternError(f"ring digit before atom in {text!r}")
            if num in ring_open:
                other, expr0 = ring_open.pop(num)
                bond = _compile_bond(expr0 or pending)
                nodes[max(prev, other)].extra.append((min(prev, other), bond))
            else:
                ring_open[num] = (prev, pending)
            pending = ""
            i += 1
            continue
        else:
            test, j = _scan_primitive(text, i, in_bracket=False)
            i = j
        node = _Node(test=test)
        if prev is not None:
            node.anchor = (prev, _compile_bond(pending))
        elif pending:
            raise PatternError(f"dangling bond in {text!r}")
        pending = ""
        nodes.append(node)
        prev = len(nodes) - 1
    if ring_open:
        raise PatternError(f"unmatched ring digit in {text!r}")
    if branch_stack:
        raise PatternError(f"unmatched '(' in {text!r}")
    if not nodes:
        raise PatternError("empty pattern")
    element, aromatic = _root_hint(text)
    return Pattern(
        nodes=nodes, text=text, root_element=element, root_aromatic=aromatic
    )


def match_at(pattern: Pattern, m: Molecule, root: int) -> bool:
    """True when the pattern matches with its first atom mapped to ``root``."""
    nodes = pattern.nodes
    if not nodes[0].test(m, root):
        return False
    k = len(nodes)
    if k == 1:
        return True
    mapping: list[int] = [-1] * k
    mapping[0] = root
    used = {root}

    bond_between: dict[tuple[int, int], int] = {}

    def bond_idx(a: int, b: int) -> int | None:
        key = (a, b) if a < b else (b, a)
        if key in bond_between:
            return bond_between[key]
        for nbr, bi in m.neighbors[a]:
            if nbr == b:
                bond_between[key] = bi
                return bi
        return None

    def rec(step: int) -> bool:
        if step == k:
            return True
        node = nodes[step]
        assert node.anchor is not None
        parent, btest = node.anchor
        for nbr, bi in m.neighbors[mapping[parent]]:
            if nbr in used or not btest(m, bi):
                continue
            if not node.test(m, nbr):
                continue
            ok = True
            for other, extra_test in node.extra:
                xbi = bond_idx(nbr, mapping[other])
                if xbi is None or not extra_test(m, xbi):
                    ok = False
                    break
            if not ok:
                continue
            mapping[step] = nbr
            used.add(nbr)
            if rec(step + 1):
                return True
            used.discard(nbr)
            mapping[step] = -1
        return False

    return rec(1)


def has_match(pattern: Pattern, m: Molecule) -> bool:
    """True when the pattern matches anchored at any atom."""
    if pattern.root_element is not None:
        return any(
            match_at(pattern, m, i)
            for i, a in enumerate(m.atoms)
            if a.element == pattern.root_element
            and a.aromatic == pattern.root_aromatic
        )
    return any(match_at(pattern, m, i) for i in range(len(m.atoms)))
