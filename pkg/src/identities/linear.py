"""Linear relations between kernel values of adjacent columns.

With K_{s,t}(d) = K(s, d; t, 0), e = +1 for plus-kind and e = -1 for
minus-kind factors at column k:

  alpha, rows:    K_{k-1,t}(d) - [d=0, t=k-1]  =  K_{k,t}(d) - a K_{k,t}(d-e)
  alpha, columns: K_{s,k}(d) - [d=0, s=k]      =  K_{s,k-1}(d) - a K_{s,k-1}(d-e)
  beta, rows:     K_{k,t}(d)   = K~_{k-1,t}(d) + b K~_{k-1,t}(d-e)
  beta, columns:  K_{s,k-1}(d) = K~_{s,k}(d)   + b K~_{s,k}(d-e)

where K~ subtracts 1 whenever both its site indices coincide.  The
minus-kind forms follow from the plus-kind ones through the row shift
and constant conjugation of the canonical form; here they are evaluated
on the original-model kernel rebuilt from canonical values.
"""

from __future__ import annotations

from src.identities.report import IdentityId, IdentityReport, model_snapshot, single_factor
from src.kernel.context import KernelContext
from src.kernel.factors import FactorKind

LINEAR_TOLERANCE = 1e-10


def _k(ctx: KernelContext, s: int, t: int, d: int) -> complex:
    return ctx.original_kernel(s, d, t, 0)


def _k_tilde(ctx: KernelContext, s: int, t: int, d: int) -> complex:
    return _k(ctx, s, t, d) - (1.0 if (s == t and d == 0) else 0.0)


def _alpha_residuals(ctx: KernelContext, k: int, t: int, d: int, a: float, e: int):
    row_lhs = _k_tilde(ctx, k - 1, t, d) if t == k - 1 else _k(ctx, k - 1, t, d)
    row_rhs = _k(ctx, k, t, d) - a * _k(ctx, k, t, d - e)
    s = t
    col_lhs = _k_tilde(ctx, s, k, d) if s == k else _k(ctx, s, k, d)
    col_rhs = _k(ctx, s, k - 1, d) - a * _k(ctx, s, k - 1, d - e)
    return (row_lhs, row_rhs), (col_lhs, col_rhs)


def _beta_residuals(ctx: KernelContext, k: int, t: int, d: int, b: float, e: int):
    row_lhs = _k(ctx, k, t, d)
    if t == k - 1:
        row_rhs = _k_tilde(ctx, k - 1, t, d) + b * _k_tilde(ctx, k - 1, t, d - e)
    else:
        row_rhs = _k(ctx, k - 1, t, d) + b * _k(ctx, k - 1, t, d - e)
    s = t
    col_lhs = _k(ctx, s, k - 1, d)
    if s == k:
        col_rhs = _k_tilde(ctx, s, k, d) + b * _k_tilde(ctx, s, k, d - e)
    else:
        col_rhs = _k(ctx, s, k, d) + b * _k(ctx, s, k, d - e)
    return (row_lhs, row_rhs), (col_lhs, col_rhs)


def _report(identity, ctx, k, tau, d, factor, row, col, tolerance) -> IdentityReport:
    row_res = abs(row[0] - row[1])
    col_res = abs(col[0] - col[1])
    return IdentityReport(
        identity_id=identity,
        parameters=model_snapshot(ctx, k=k, tau=tau, d=d, factor=str(factor)),
        lhs=row[0],
        rhs=row[1],
        residual=max(row_res, col_res),
        tolerance=tolerance,
        details={"row_residual": row_res, "column_residual": col_res,
                 "column_lhs": col[0], "column_rhs": col[1]},
    )


def check_linear_relation_alpha(
    ctx: KernelContext, k: int, tau: int, d: int, tolerance: float = LINEAR_TOLERANCE
) -> IdentityReport:
    """Row and column relations for an alpha_plus factor at column k.

    Raises:
        WrongFactorKind: If column k is not a single alpha_plus factor.
    """
    factor = single_factor(ctx, k, {FactorKind.ALPHA_PLUS})
    row, col = _alpha_residuals(ctx, k, tau, d, factor.param, 1)
    return _report(IdentityId.LINEAR_ALPHA, ctx, k, tau, d, factor, row, col, tolerance)


def check_linear_relation_beta(
    ctx: KernelContext, k: int, tau: int, d: int, tolerance: float = LINEAR_TOLERANCE
) -> IdentityReport:
    """Row and column relations for a beta_plus factor at column k.

    Raises:
        WrongFactorKind: If column k is not a single beta_plus factor.
    """
    factor = single_factor(ctx, k, {FactorKind.BETA_PLUS})
    row, col = _beta_residuals(ctx, k, tau, d, factor.param, 1)
    return _report(IdentityId.LINEAR_BETA, ctx, k, tau, d, factor, row, col, tolerance)


def check_linear_relation_minus(
    ctx: KernelContext, k: int, tau: int, d: int, tolerance: float = LINEAR_TOLERANCE
) -> IdentityReport:
    """Relations for an alpha_minus or beta_minus factor at column k.

    Raises:
        WrongFactorKind: If column k is not a single minus-kind alpha/beta.
    """
    factor = single_factor(ctx, k, {FactorKind.ALPHA_MINUS, FactorKind.BETA_MINUS})
    if factor.kind is FactorKind.ALPHA_MINUS:
        row, col = _alpha_residuals(ctx, k, tau, d, factor.param, -1)
    else:
        row, col = _beta_residuals(ctx, k, tau, d, factor.param, -1)
    return _report(IdentityId.LINEAR_MINUS, ctx, k, tau, d, factor, row, col, tolerance)
