"""Reduction of a model to canonical coordinates.

Three transformations leave every correlation determinant unchanged:

  * u = r v rescales the arcs to the unit circle; the kernel picks up
    r^(y - x), a diagonal conjugation.
  * psi_k -> c psi_k multiplies K(s, t) by G(s) / G(t) with
    G(s) = prod_{m <= s} c_m, again a diagonal conjugation.
  * psi_k -> u^n psi_k moves rows of all columns s >= k by n.

Using (1 - a/u)^-1 = -(u/a) (1 - u/a)^-1 and (1 + b/u) = (b/u) (1 + u/b),
minus-kind alpha/beta factors turn into plus-kind ones.  Gamma-minus
factors stay as they are: their only singularity is the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import structlog

from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter
from src.kernel.quadrature import ArcSign, ContourSpec, QuadratureSpec

log = structlog.get_logger()


class NotNormalizable(ValueError):
    """Raised when a model cannot be brought to a usable canonical form."""
    pass


_RESCALE_UP = {FactorKind.ALPHA_PLUS, FactorKind.BETA_PLUS, FactorKind.GAMMA_PLUS}


@dataclass
class CanonicalForm:
    """A model in canonical coordinates plus the data to pull results back.

    Attributes:
        canonical_sequence: Weights with only alpha_plus, beta_plus,
            gamma_plus and gamma_minus factors.
        shift_map: Column k -> row shift introduced at k (applies to all
            columns s >= k).
        conjugation_log: Column k -> ln|c_k| of the constant pulled out at k.
        conjugation_sign: Column k -> sign of c_k.
        radial_scale: r = |z| of the original model.
        z: Spectral parameter with modulus 1.
    """
    canonical_sequence: PsiSequence
    shift_map: dict[int, int] = field(default_factory=dict)
    conjugation_log: dict[int, float] = field(default_factory=dict)
    conjugation_sign: dict[int, int] = field(default_factory=dict)
    radial_scale: float = 1.0
    z: SpectralParameter = field(default_factory=lambda: SpectralParameter(1.0, math.pi / 2))

    # ------------------------------------------------------------------
    # Cumulative transforms
    # ------------------------------------------------------------------

    def row_shift(self, sigma: int) -> int:
        """h(sigma): total row shift of column sigma."""
        return sum(n for k, n in self.shift_map.items() if k <= sigma)

    def gauge(self, sigma: int) -> complex:
        """G(sigma) = product of the constants of columns k <= sigma."""
        log_mag = sum(v for k, v in self.conjugation_log.items() if k <= sigma)
        sign = 1
        for k, s in self.conjugation_sign.items():
            if k <= sigma:
                sign *= s
        return sign * math.exp(log_mag)

    def to_canonical(self, sigma: int, x: int) -> tuple[int, int]:
        """Canonical site of the original site (sigma, x)."""
        return sigma, x - self.row_shift(sigma)

    def to_original(self, sigma: int, x: int) -> tuple[int, int]:
        return sigma, x + self.row_shift(sigma)

    def kernel_prefactor(self, sigma: int, x: int, tau: int, y: int) -> complex:
        """r^(y-x) G(sigma)/G(tau): original K over canonical K at pulled-back sites."""
        return self.radial_scale ** (y - x) * self.gauge(sigma) / self.gauge(tau)

    @property
    def is_identity(self) -> bool:
        return (not self.shift_map and not self.conjugation_log
                and self.radial_scale == 1.0)


def canonicalize(
    sequence: PsiSequence,
    z: SpectralParameter,
    max_log_param: float = 30.0,
    pole_margin: float = 1e-6,
) -> CanonicalForm:
    """Bring a model to |z| = 1 with plus-kind alpha and beta factors.

    Args:
        sequence: Original column weights.
        z: Original spectral parameter.
        max_log_param: Largest admissible |ln p| of a canonical parameter.
        pole_margin: Minimal distance of any pole from its arc.

    Returns:
        The canonical model and the shift/conjugation data.

    Raises:
        NotNormalizable: If a canonical parameter is out of numerical
            range or a pole sits within pole_margin of an arc.
    """
    r = z.modulus
    unit_z = SpectralParameter(1.0, z.argument)

    columns: dict[int, tuple[PsiFactor, ...]] = {}
    shifts: dict[int, int] = {}
    logs: dict[int, float] = {}
    signs: dict[int, int] = {}

    for k, factors in sequence.factors.items():
        out: list[PsiFactor] = []
        shift, log_c, sign = 0, 0.0, 1
        for f in factors:
            p = f.param * r if f.kind in _RESCALE_UP else f.param / r
            if f.kind is FactorKind.ALPHA_MINUS:
                # (1 - p/u)^-1 = -(u/p) (1 - u/p)^-1
                out.append(PsiFactor(FactorKind.ALPHA_PLUS, 1.0 / p))
                shift += 1
                log_c -= math.log(p)
                sign = -sign
            elif f.kind is FactorKind.BETA_MINUS:
                # (1 + p/u) = (p/u) (1 + u/p)
                out.append(PsiFactor(FactorKind.BETA_PLUS, 1.0 / p))
                shift -= 1
                log_c += math.log(p)
            else:
                out.append(PsiFactor(f.kind, p))
        columns[k] = tuple(out)
        if shift:
            shifts[k] = shift
        if log_c or sign < 0:
            logs[k] = log_c
            signs[k] = sign

    canonical = PsiSequence(factors=columns)
    _check_range(canonical, max_log_param)
    check_pole_clearance(canonical, unit_z, pole_margin, error=NotNormalizable)

    form = CanonicalForm(
        canonical_sequence=canonical,
        shift_map=shifts,
        conjugation_log=logs,
        conjugation_sign=signs,
        radial_scale=r,
        z=unit_z,
    )
    if not form.is_identity:
        log.debug("model_canonicalized", radial_scale=r, shifted_columns=sorted(shifts))
    return form


def _check_range(sequence: PsiSequence, max_log_param: float) -> None:
    for k, factors in sequence.factors.items():
        for f in factors:
            if f.kind.is_gamma:
                continue
            if abs(math.log(f.param)) > max_log_param:
                raise NotNormalizable(
                    f"column {k}: canonical parameter {f.param:.3e} outside "
                    f"exp(+-{max_log_param:g})"
                )


def check_pole_clearance(
    sequence: PsiSequence,
    z: SpectralParameter,
    margin: float,
    error: type[Exception] = NotNormalizable,
) -> None:
    """Ensure every integrand pole keeps `margin` away from its arc.

    Integrands for sigma < tau use the reciprocal weights on the plus arc;
    those for sigma > tau use the weights themselves on the minus arc.
    """
    spec = QuadratureSpec()
    plus = ContourSpec(ArcSign.PLUS, z.modulus, spec)
    minus = ContourSpec(ArcSign.MINUS, z.modulus, spec)
    for k, factors in sequence.factors.items():
        for f in factors:
            for contour, inverse in ((plus, True), (minus, False)):
                for pole in f.poles(inverse=inverse):
                    if contour.distance_to(pole, z.argument) < margin:
                        raise error(
                            f"column {k}: pole of {f} at {pole:.6g} lies within "
                            f"{margin:g} of the {contour.sign.value} arc"
                        )
