"""Gate-level synthesis of sampled Pauli exponentials.

``exp(i theta P)`` is built as: basis layer (H for X, BASIS_Y for Y), a CNOT
ladder from every other support qubit into the root (ascending control order),
``RZ(-2 theta)`` on the root, the mirrored ladder, and the inverse basis layer.

Conventions pinned by the unitary tests:

* ``RZ(phi) = diag(exp(-i phi/2), exp(i phi/2))``, so ``RZ(-2 theta) = exp(i theta Z)``.
* ``BASIS_Y = H . Sdg`` (Sdg applied first), the unitary
  ``[[1, -i], [1, i]] / sqrt(2)``; it maps Y to Z under conjugation.
* Qubits are 1-based; qubit 1 is the least significant bit.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .flow import default_cnot_cost
from .pauli import Hamiltonian, PauliString
from .sampler import TermSequence

SINGLE_QUBIT = ("H", "BASIS_Y", "BASIS_Y_DAG", "RZ")
GATE_KINDS = SINGLE_QUBIT + ("CX",)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CX" else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} acts on {want} qubit(s), got {self.qubits}")
        if any(q < 1 for q in self.qubits):
            raise ValueError("qubit indices are 1-based")
        if self.kind == "CX" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CX control and target must differ")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    def __repr__(self):
        if self.kind == "RZ":
            return f"RZ({self.angle:.6g})@{self.qubits[0]}"
        return f"{self.kind}@{','.join(map(str, self.qubits))}"


def H(q):
    return Gate("H", (q,))


def CX(c, t):
    return Gate("CX", (c, t))


def RZ(q, angle):
    return Gate("RZ", (q,), float(angle))


_INVERSE = {"H": "H", "BASIS_Y": "BASIS_Y_DAG", "BASIS_Y_DAG": "BASIS_Y", "CX": "CX"}


def is_inverse(a: Gate, b: Gate) -> bool:
    if a.qubits != b.qubits:
        return False
    if a.kind == "RZ":
        return b.kind == "RZ" and a.angle == -b.angle
    return _INVERSE.get(a.kind) == b.kind


def commutes(a: Gate, b: Gate) -> bool:
    """Sufficient (not necessary) syntactic commutation test."""
    if not set(a.qubits) & set(b.qubits):
        return True
    if a.kind == "CX" and b.kind == "CX":
        # shared control or shared target is fine; control-on-target is not
        return a.qubits[0] != b.qubits[1] and b.qubits[0] != a.qubits[1]
    if a == b:
        return True
    return False


@dataclass(frozen=True)
class SynthesisPlan:
    root: int
    ladder: tuple[int, ...]
    basis: dict = field(default_factory=dict)  # qubit -> "X" | "Y"

    def check(self, p: PauliString):
        support = set(p.support)
        if self.root not in support:
            raise ValueError(f"root {self.root} not in support {sorted(support)} of {p}")
        if sorted(self.ladder) != sorted(support - {self.root}) or len(set(self.ladder)) != len(self.ladder):
            raise ValueError(f"ladder {self.ladder} must cover support minus root exactly once")
        want = {q: p.op(q) for q in support if p.op(q) in "XY"}
        if dict(self.basis) != want:
            raise ValueError(f"basis map {self.basis} does not match {p}")


def default_plan(p: PauliString) -> SynthesisPlan:
    """Root on the highest support qubit, ladder in ascending qubit order."""
    support = p.support
    if not support:
        raise ValueError("identity string has no synthesis plan")
    return SynthesisPlan(support[-1], tuple(support[:-1]),
                         {q: p.op(q) for q in support if p.op(q) in "XY"})


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()
    global_phase: complex = 1.0 + 0j
    junction_cx_predicted: Optional[int] = None
    junction_cx_achieved: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) > self.qubit_count:
                raise ValueError(f"{g!r} outside {self.qubit_count}-qubit register")

    @property
    def stats(self) -> dict:
        counts = Counter(g.kind for g in self.gates)
        out = {
            "cx_count": counts["CX"],
            "single_qubit_count": sum(counts[k] for k in SINGLE_QUBIT),
            "rz_count": counts["RZ"],
        }
        if self.junction_cx_predicted is not None:
            out["junction_cx_predicted"] = self.junction_cx_predicted
            out["junction_cx_achieved"] = self.junction_cx_achieved
        return out

    def __add__(self, other: Circuit) -> Circuit:
        if other.qubit_count != self.qubit_count:
            raise ValueError("qubit counts differ")
        return Circuit(self.qubit_count, self.gates + other.gates, self.global_phase * other.global_phase)


def _basis_gate(op: str, q: int, inverse: bool) -> Gate:
    if op == "X":
        return H(q)
    return Gate("BASIS_Y_DAG" if inverse else "BASIS_Y", (q,))


def _term_gates(p: PauliString, theta: float, plan: SynthesisPlan) -> list[Gate]:
    pre = [_basis_gate(op, q, False) for q, op in sorted(plan.basis.items())]
    ladder = [CX(q, plan.root) for q in plan.ladder]
    post = [_basis_gate(op, q, True) for q, op in sorted(plan.basis.items(), reverse=True)]
    return pre + ladder + [RZ(plan.root, -2.0 * theta)] + ladder[::-1] + post


def synthesize_term(p: PauliString, theta: float, plan: Optional[SynthesisPlan] = None) -> Circuit:
    """Gates implementing ``exp(i theta P)`` exactly.

    An all-identity string contributes only the global phase ``exp(i theta)``.
    """
    if not p.support:
        return Circuit(p.n_qubits, (), complex(math.cos(theta), math.sin(theta)))
    if plan is None:
        plan = default_plan(p)
    else:
        plan.check(p)
    return Circuit(p.n_qubits, _term_gates(p, theta, plan))


def _merge_runs(seq: TermSequence, h: Hamiltonian) -> list[tuple[PauliString, float]]:
    blocks: list[tuple[PauliString, float]] = []
    for idx in seq.indices:
        term = h.terms[int(idx)]
        theta = math.copysign(seq.angle, term.weight)
        if blocks and blocks[-1][0] == term.string:
            blocks[-1] = (term.string, blocks[-1][1] + theta)
        else:
            blocks.append((term.string, theta))
    return blocks


def plan_roots(strings: Sequence[PauliString]) -> list[int]:
    """Pick one root per block so junction CNOTs can cancel.

    A junction between consecutive blocks removes ``2 * (|shared| - 1)``
    CNOTs when both blocks use the same root and that root carries the same
    operator in both strings. Roots are chosen by a Viterbi pass maximizing
    the total; ties go to the higher qubit, so an isolated block gets the
    same root as :func:`default_plan`.
    """
    if not strings:
        return []
    score: dict[int, int] = {q: 0 for q in strings[0].support}
    back: list[dict[int, int]] = []
    for prev, cur in zip(strings, strings[1:]):
        best_prev = max(score, key=lambda q: (score[q], q))
        gain = len([q for q in cur.support if prev.op(q) == cur.op(q)]) - 1
        nxt, ptr = {}, {}
        for q in cur.support:
            nxt[q], ptr[q] = score[best_prev], best_prev
            if q in score and prev.op(q) == cur.op(q) and gain > 0:
                keep = score[q] + 2 * gain
                if keep >= nxt[q]:
                    nxt[q], ptr[q] = keep, q
        back.append(ptr)
        score = nxt
    roots = [max(score, key=lambda q: (score[q], q))]
    for ptr in reversed(back):
        roots.append(ptr[roots[-1]])
    return roots[::-1]


def _cancel_into(window: list[Gate], g: Gate) -> bool:
    """Cancel ``g`` against an inverse in ``window`` reachable through commuting gates."""
    for k in range(len(window) - 1, -1, -1):
        w = window[k]
        if is_inverse(w, g):
            del window[k]
            return True
        if not commutes(w, g):
            return False
    return False


def assemble(seq: TermSequence, h: Hamiltonian, enable_cancellation: bool = True) -> Circuit:
    """Concatenate per-step exponentials ``exp(i sign(h_i) angle H_i)``.

    With cancellation, runs of the same Pauli string are merged into one block
    and inverse gate pairs meeting at each block junction are removed. A pair
    is removed only when every gate between them commutes with the moved gate,
    so the unitary is unchanged.
    """
    n = h.qubit_count
    if seq.indices.size and (seq.indices.min() < 0 or seq.indices.max() >= len(h)):
        raise IndexError("sequence index out of range for this Hamiltonian")
    if not enable_cancellation:
        gates: list[Gate] = []
        phase = 1.0 + 0j
        for idx in seq.indices:
            term = h.terms[int(idx)]
            c = synthesize_term(term.string, math.copysign(seq.angle, term.weight))
            gates.extend(c.gates)
            phase *= c.global_phase
        return Circuit(n, gates, phase)

    out: list[Gate] = []
    window: list[Gate] = []  # gates after the last emitted rotation
    phase = 1.0 + 0j
    predicted = 0
    prev_string: Optional[PauliString] = None
    blocks = []
    for string, theta in _merge_runs(seq, h):
        if string.support:
            blocks.append((string, theta))
        else:
            phase *= complex(math.cos(theta), math.sin(theta))
    roots = plan_roots([s for s, _ in blocks])
    for (string, theta), root in zip(blocks, roots):
        support = string.support
        plan = SynthesisPlan(root, tuple(q for q in support if q != root),
                             {q: string.op(q) for q in support if string.op(q) in "XY"})
        c = synthesize_term(string, theta, plan)
        if prev_string is not None:
            predicted += default_cnot_cost(prev_string, string)
        prev_string = string
        gates = list(c.gates)
        r = next(k for k, g in enumerate(gates) if g.kind == "RZ")
        for g in gates[:r]:
            if not _cancel_into(window, g):
                window.append(g)
        out.extend(window)
        out.append(gates[r])
        window = gates[r + 1:]
    out.extend(window)

    achieved = 0
    seen_rz = False
    pending = 0
    for g in out:
        if g.kind == "RZ":
            if seen_rz:
                achieved += pending
            seen_rz = True
            pending = 0
        elif g.kind == "CX":
            pending += 1
    return Circuit(n, out, phase, predicted, achieved)


# ---------------------------------------------------------------- emission

QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def emit(c: Circuit, fmt: str = "qasm") -> str:
    """Serialize to an OpenQASM 2.0 subset (``h, s, sdg, rz, cx``) or JSON.

    QASM has no global phase statement; a non-trivial phase is written as a
    ``// global_phase <re> <im>`` comment, which :func:`read_qasm` understands.
    """
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps({
            "qubits": c.qubit_count,
            "global_phase": [c.global_phase.real, c.global_phase.imag],
            "gates": [{"kind": g.kind, "qubits": list(g.qubits), **({"angle": g.angle} if g.kind == "RZ" else {})}
                      for g in c.gates],
        })
    if fmt not in ("qasm", "qasm2", "qasm2_subset"):
        raise ValueError(f"unknown format {fmt!r}")
    lines = [QASM_HEADER + f"qreg q[{c.qubit_count}];"]
    if c.global_phase != 1:
        lines.append(f"// global_phase {c.global_phase.real!r} {c.global_phase.imag!r}")
    for g in c.gates:
        q = [f"q[{k - 1}]" for k in g.qubits]
        if g.kind == "H":
            lines.append(f"h {q[0]};")
        elif g.kind == "BASIS_Y":
            lines += [f"sdg {q[0]};", f"h {q[0]};"]
        elif g.kind == "BASIS_Y_DAG":
            lines += [f"h {q[0]};", f"s {q[0]};"]
        elif g.kind == "RZ":
            lines.append(f"rz({g.angle!r}) {q[0]};")
        else:
            lines.append(f"cx {q[0]},{q[1]};")
    return "\n".join(lines) + "\n"


_QREG = re.compile(r"qreg\s+q\[(\d+)\];")
_STMT = re.compile(r"(h|s|sdg|cx|rz\(([^)]*)\))\s+q\[(\d+)\](?:\s*,\s*q\[(\d+)\])?;")


def read_qasm(text: str) -> Circuit:
    """Inverse of :func:`emit` for the QASM subset."""
    n = None
    phase = 1.0 + 0j
    stmts = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("// global_phase"):
            _, _, re_, im_ = line.split()
            phase = complex(float(re_), float(im_))
            continue
        if line.startswith("//") or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        m = _QREG.fullmatch(line)
        if m:
            n = int(m.group(1))
            continue
        m = _STMT.fullmatch(line)
        if not m:
            raise ValueError(f"unsupported QASM statement {line!r}")
        name = m.group(1).split("(")[0]
        qs = [int(m.group(3)) + 1] + ([int(m.group(4)) + 1] if m.group(4) else [])
        stmts.append((name, qs, m.group(2)))
    if n is None:
        raise ValueError("missing qreg declaration")
    gates = []
    k = 0
    while k < len(stmts):
        name, qs, arg = stmts[k]
        nxt = stmts[k + 1] if k + 1 < len(stmts) else None
        if name == "sdg" and nxt and nxt[0] == "h" and nxt[1] == qs:
            gates.append(Gate("BASIS_Y", qs))
            k += 2
        elif name == "h" and nxt and nxt[0] == "s" and nxt[1] == qs:
            gates.append(Gate("BASIS_Y_DAG", qs))
            k += 2
        elif name == "h":
            gates.append(H(qs[0]))
            k += 1
        elif name == "rz":
            gates.append(RZ(qs[0], float(arg)))
            k += 1
        elif name == "cx":
            gates.append(CX(*qs))
            k += 1
        else:
            raise ValueError(f"unpaired {name} on qubit {qs[0]}")
    return Circuit(n, gates, phase)


def read_json(text: str) -> Circuit:
    d = json.loads(text)
    gates = [Gate(g["kind"], tuple(g["qubits"]), float(g.get("angle", 0.0))) for g in d["gates"]]
    re_, im_ = d.get("global_phase", [1.0, 0.0])
    return Circuit(int(d["qubits"]), gates, complex(re_, im_))


def concat(circuits: Sequence[Circuit]) -> Circuit:
    out = circuits[0]
    for c in circuits[1:]:
        out = out + c
    return out
