"""Независимое от решателя описание MIP: переменные, помеченные ограничения, целевая функция"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Union

Number = Union[int, float, Fraction]
Sense = Literal["<=", ">=", "=="]


class VarType(str, Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"
    INTEGER = "integer"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    vtype: VarType
    lb: Number = 0
    ub: Number | None = 1


@dataclass(frozen=True, slots=True)
class Constraint:
    name: str
    tag: str
    terms: Mapping[str, Number]
    sense: Sense
    rhs: Number

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(float(c) * values.get(v, 0.0) for v, c in self.terms.items())

    def satisfied(self, values: Mapping[str, float], tol: float = 1e-6) -> bool:
        lhs, rhs = self.activity(values), float(self.rhs)
        if self.sense == "<=":
            return lhs <= rhs + tol
        if self.sense == ">=":
            return lhs >= rhs - tol
        return abs(lhs - rhs) <= tol


def merge_terms(*parts: Iterable[tuple[str, Number]]) -> dict[str, Number]:
    """Складывает коэффициенты одинаковых переменных, нулевые отбрасывает"""
    out: dict[str, Number] = {}
    for part in parts:
        for name, coef in part:
            out[name] = out.get(name, 0) + coef
    return {k: v for k, v in out.items() if v != 0}


@dataclass
class MipModel:
    name: str
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, Number] = field(default_factory=dict)
    objective_constant: Number = 0

    def add_var(
        self, name: str, vtype: VarType = VarType.BINARY, lb: Number = 0, ub: Number | None = 1
    ) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if vtype is VarType.CONTINUOUS and ub == 1:
            ub = None
        self.variables[name] = Variable(name, vtype, lb, ub)
        return name

    def add_constraint(
        self,
        tag: str,
        terms: Mapping[str, Number] | Iterable[tuple[str, Number]],
        sense: Sense,
        rhs: Number,
    ) -> Constraint:
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged = merge_terms(items)
        unknown = [v for v in merged if v not in self.variables]
        if unknown:
            raise KeyError(f"constraint {tag} references unknown variables {unknown[:3]}")
        row = Constraint(f"{tag}_{len(self.constraints)}", tag, merged, sense, rhs)
        self.constraints.append(row)
        return row

    def set_objective(
        self, terms: Mapping[str, Number] | Iterable[tuple[str, Number]], constant: Number = 0
    ) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        self.objective = merge_terms(items)
        self.objective_constant = constant

    def objective_value(self, values: Mapping[str, float]) -> float:
        return float(self.objective_constant) + sum(
            float(c) * values.get(v, 0.0) for v, c in self.objective.items()
        )

    def tag_census(self) -> Counter[str]:
        return Counter(c.tag for c in self.constraints)

    def count_vars(self, prefix: str) -> int:
        return sum(1 for name in self.variables if name.startswith(prefix))

    def violated(self, values: Mapping[str, float], tol: float = 1e-6) -> list[Constraint]:
        return [c for c in self.constraints if not c.satisfied(values, tol)]

    @property
    def binaries(self) -> list[str]:
        return [v.name for v in self.variables.values() if v.vtype is VarType.BINARY]

    def stats(self) -> dict[str, int]:
        return {"variables": len(self.variables), "constraints": len(self.constraints)}
