"""Exact rational exponent bookkeeping for the weighted inequalities.

Everything here is a Fraction so the structural identities (the transfer
relation between extension-side and packet-side exponents, the n=2
collapses, the sharpness thresholds) can be asserted with zero tolerance.

Naming: e_* are the packet-side powers of R multiplying the weight supremum
over planks (e_plank), tangential unit slabs (e_slab), unit tubes (e_tube)
and tangent-normal hyperplane slabs (e_hyperslab); a_mt and a_tube are the
extension-side powers after the R^(n-1) trace factor is absorbed.  The
lower_* fields are the sharpness thresholds of the axiomatic lower-bound
constructions, kept verbatim (lower_slab is stated there with an
n(n+1)-denominator, which differs from e_slab's exact n^2(n+1) form by the
source's own arithmetic; both are exposed)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class ExponentTable:
    n: int

    @property
    def p(self) -> Fraction:
        return Fraction(self.n * (self.n + 1))

    @property
    def r(self) -> Fraction:
        # 1/r = 1 - 2/p
        return self.p / (self.p - 2)

    @property
    def a_mt(self) -> Fraction:
        n = self.n
        return Fraction(n - 3, 2) + Fraction(2, n) - Fraction(2, n * n * (n + 1))

    @property
    def a_tube(self) -> Fraction:
        n = self.n
        return Fraction(n - 2) + Fraction(2, n * (n + 1))

    @property
    def e_plank(self) -> Fraction:
        return -Fraction(self.n + 1, 2) / self.r

    @property
    def e_slab(self) -> Fraction:
        return self.e_plank + Fraction(1, self.n) / self.r

    @property
    def e_hyperslab(self) -> Fraction:
        return self.e_slab

    @property
    def e_tube(self) -> Fraction:
        return -1 / self.r

    # sharpness thresholds of the three lower-bound constructions
    @property
    def lower_slab(self) -> Fraction:
        n = self.n
        return -Fraction(n + 1, 2) + Fraction(2, n) - Fraction(2, n * (n + 1))

    @property
    def lower_tube(self) -> Fraction:
        return -1 + Fraction(2, self.n * (self.n + 1))

    @property
    def lower_hyperslab(self) -> Fraction:
        return -Fraction(self.n + 1, 2) + Fraction(1, self.n)

    def rhs_power(self, ineq_id: str) -> Fraction:
        """Power of R in the RHS functional for each inequality id (the
        R^eps factor is handled separately)."""
        n = self.n
        table = {
            "cor31a": self.e_plank,
            "cor33": self.e_slab,
            "cor34": self.e_tube,
            "cor35": self.e_hyperslab,
            "thm22": Fraction(0),
            "thm41": Fraction(n - 1) + self.e_hyperslab,
            "thm11": self.a_mt,
            "thm16": self.a_tube,
        }
        if ineq_id not in table:
            from .errors import ConfigError

            raise ConfigError(f"unknown inequality id {ineq_id!r}")
        return table[ineq_id]

    def checks(self) -> dict[str, bool]:
        """The exact identities the table must satisfy."""
        n = self.n
        out = {
            "transfer_slab": Fraction(n - 1) + self.e_slab == self.a_mt,
            "transfer_tube": Fraction(n - 1) + self.e_tube == self.a_tube,
            "plank_equals_lower_hyperslab": self.e_plank == self.lower_hyperslab,
            "r_conjugate": 1 / self.r + 2 / self.p == 1,
        }
        if n == 2:
            out.update(
                p6=self.p == 6,
                r32=self.r == Fraction(3, 2),
                amt=self.a_mt == Fraction(1, 3),
                atube=self.a_tube == Fraction(1, 3),
                eplank=self.e_plank == -1,
                etube=self.e_tube == Fraction(-2, 3),
                eslab=self.e_slab == Fraction(-2, 3),
            )
        if n == 3:
            out.update(
                lower_slab_n3=self.lower_slab == Fraction(-3, 2),
                lower_tube_n3=self.lower_tube == Fraction(-5, 6),
                lower_hyperslab_n3=self.lower_hyperslab == Fraction(-5, 3),
            )
        return out
