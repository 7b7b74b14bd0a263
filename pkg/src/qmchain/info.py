"""Entropy accounting over the chain's subsystems.

All entropies are von Neumann entropies in bits. ``conditional_entropy``
can go negative on entangled states; that sign is the whole point of the
record-plus-qubit analysis, so nothing here clamps it.

``venn`` labels each subsystem of a joint state and reports the joint
entropy of every non-empty label subset, the conditional entropy of the
first subsystem given all the others (the quantum side given the record,
with the usual register ordering), pairwise and total shared entropies,
and, for up to three labels, the inclusion-exclusion value of each diagram
region. Three-set region values use the interaction information, which can
be negative even for classical states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import DensityMatrix, partial_trace, von_neumann_entropy


def conditional_entropy(rho: DensityMatrix, target: list[int], given: list[int]) -> float:
    """S(target | given) = S(target, given) - S(given), in bits.

    ``target`` and ``given`` index subsystems of ``rho`` and must not overlap.
    An empty ``given`` reduces to the plain joint entropy of ``target``.
    """
    t, g = list(target), list(given)
    if set(t) & set(g):
        raise ValueError(f"target {t} and conditioning set {g} overlap")
    if not t:
        raise ValueError("target must be non-empty")
    joint = partial_trace(rho, sorted(set(t) | set(g)))
    if not g:
        return von_neumann_entropy(joint)
    marginal = partial_trace(rho, sorted(set(g)))
    return von_neumann_entropy(joint) - von_neumann_entropy(marginal)


def mutual_information(rho: DensityMatrix, a: list[int], b: list[int]) -> float:
    """I(A:B) = S(A) + S(B) - S(AB), in bits. Non-negative by subadditivity."""
    if set(a) & set(b):
        raise ValueError(f"subsystem groups {a} and {b} overlap")
    sa = von_neumann_entropy(partial_trace(rho, sorted(a)))
    sb = von_neumann_entropy(partial_trace(rho, sorted(b)))
    sab = von_neumann_entropy(partial_trace(rho, sorted(set(a) | set(b))))
    return sa + sb - sab


def _subset_key(names: tuple[str, ...]) -> str:
    return ",".join(sorted(names))


@dataclass(frozen=True)
class VennReport:
    """Entropy Venn diagram over labelled subsystems.

    ``partition`` lists one label per subsystem in register order.
    ``region_entropies`` maps every non-empty label subset (comma-joined,
    sorted) to its joint entropy. ``conditional`` is the entropy of the
    first label given all the rest. ``mutual`` holds the pairwise shared
    entropies plus the total multivariate one under the all-labels key.
    ``regions`` carries the inclusion-exclusion diagram values when the
    partition has at most three labels, otherwise it is empty.
    """

    partition: tuple[str, ...]
    region_entropies: dict[str, float]
    conditional: float
    mutual: dict[str, float]
    regions: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "partition": list(self.partition),
            "region_entropies": dict(self.region_entropies),
            "conditional": self.conditional,
            "mutual": dict(self.mutual),
            "regions": dict(self.regions),
        }


def venn(rho: DensityMatrix, labels: list[str]) -> VennReport:
    """Full subset-entropy decomposition of ``rho`` under one label per
    subsystem. Raises on a label-count mismatch or duplicate labels."""
    names = list(labels)
    if len(names) != rho.n_subsystems:
        raise ValueError(
            f"got {len(names)} labels for {rho.n_subsystems} subsystems"
        )
    if len(set(names)) != len(names):
        raise ValueError(f"labels must be distinct, got {names}")

    index = {name: i for i, name in enumerate(names)}

    def s(*combo: str) -> float:
        return joint[_subset_key(combo)]

    joint: dict[str, float] = {}
    for r in range(1, len(names) + 1):
        for combo in itertools.combinations(names, r):
            idx = sorted(index[name] for name in combo)
            joint[_subset_key(combo)] = von_neumann_entropy(partial_trace(rho, idx))

    if len(names) == 1:
        conditional = s(names[0])
    else:
        conditional = s(*names) - s(*names[1:])

    mutual: dict[str, float] = {}
    for a, b in itertools.combinations(names, 2):
        mutual[_subset_key((a, b))] = s(a) + s(b) - s(a, b)
    if len(names) >= 2:
        # multivariate shared entropy: -sum over subsets B of (-1)^|B| S(B)
        total = 0.0
        for r in range(1, len(names) + 1):
            for combo in itertools.combinations(names, r):
                total -= (-1) ** r * joint[_subset_key(combo)]
        mutual[_subset_key(tuple(names))] = total

    regions: dict[str, float] = {}
    if len(names) == 1:
        a = names[0]
        regions[a] = s(a)
    elif len(names) == 2:
        a, b = names
        regions[_subset_key((a,))] = s(a, b) - s(b)
        regions[_subset_key((b,))] = s(a, b) - s(a)
        regions[_subset_key((a, b))] = s(a) + s(b) - s(a, b)
    elif len(names) == 3:
        a, b, c = names
        for solo, pair in ((a, (b, c)), (b, (a, c)), (c, (a, b))):
            regions[_subset_key((solo,))] = s(a, b, c) - s(*pair)
        # I(x:y|z) = S(xz) + S(yz) - S(xyz) - S(z)
        for (x, y), z in (((a, b), c), ((a, c), b), ((b, c), a)):
            regions[_subset_key((x, y))] = s(x, z) + s(y, z) - s(a, b, c) - s(z)
        regions[_subset_key((a, b, c))] = mutual[_subset_key((a, b, c))]

    return VennReport(
        partition=tuple(names),
        region_entropies=joint,
        conditional=conditional,
        mutual=mutual,
        regions=regions,
    )
