"""Command-line front end.

Subcommands:

* ``certify``    -- run the certificate bundles (all families or a selection),
* ``emit-csv``   -- write the per-family data files (one CSV per family),
* ``sweep``      -- numeric ratio iteration over a half-plane grid,
* ``casimir``    -- eigenstructure and Casimir-identity checks,
* ``ode-verify`` -- symmetry modes, factorization identities, normal-form
                    chain and indicial roots,
* ``wall``       -- continued-fraction stability expansion of a polynomial.

Exit codes: 0 all selected checks pass, 1 any check fails, 2 configuration
error.  Reports are deterministic: no timestamps, stable orderings, and
output is identical for any ``--jobs`` setting.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from modestab import casimir as casimir_mod
from modestab import certify as certify_mod
from modestab import odeverify
from modestab import quasisolution as quasi_mod
from modestab import recurrence as rec_mod
from modestab.cases import (
    FAMILIES,
    CaseSpec,
    InvalidCase,
    family_filename,
    select_families,
    start_index_case,
)
from modestab.exactalg import RatFunc, parse_expression, poly_in_t, to_expression

CSV_KEYS = ("A", "B", "N", "d_0", "l_0", "r_N", "rtilde", "delta_N", "C",
            "epsilon", "bounddelta", "boundC", "boundepsilon")

CSV_DESCRIPTIONS = {
    "A": "coefficient A_n(lambda) of the three-term recurrence "
         "a_{n+2} = A_n a_{n+1} + B_n a_n",
    "B": "coefficient B_n(lambda) of the three-term recurrence",
    "N": "starting index of the error-bound induction",
    "d_0": "start of the d range covered by this file; d is shifted by this "
           "amount in the bound polynomials",
    "l_0": "start of the l range covered by this file; l is shifted by this "
           "amount in the bound polynomials",
    "r_N": "exact ratio iterate r_N(lambda) at the starting index",
    "rtilde": "quasi-solution rtilde_n(lambda) approximating the ratio iterates",
    "delta_N": "relative error delta_N(lambda) = r_N/rtilde_N - 1 at the "
               "starting index",
    "C": "auxiliary function C_n(lambda) = B_n/(rtilde_n rtilde_{n+1})",
    "epsilon": "auxiliary function epsilon_n(lambda) = "
               "(A_n rtilde_n + B_n)/(rtilde_n rtilde_{n+1}) - 1",
    "bounddelta": "certificate polynomial u^2 |Q(it)|^2 - v^2 |P(it)|^2 for "
                  "|delta_N(it)| <= alpha, a polynomial in t^2 and the shifted "
                  "parameters; nonnegative coefficients certify the bound, and "
                  "one family passes by the recorded discriminant fallback",
    "boundC": "certificate polynomial for |C_n(it)| <= beta_n, with n shifted "
              "by the starting index",
    "boundepsilon": "certificate polynomial for |epsilon_n(it)| <= gamma_n, "
                    "with n shifted by the starting index",
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    command: str
    l: int | None = None
    m_kind: str | None = None
    d: int | None = None
    grid: tuple = (Fraction(0), Fraction(5), Fraction(-5), Fraction(5), Fraction(1, 2))
    n_max: int = 5000
    tolerance: float = 1e-6
    outdir: str | None = None
    jobs: int = 0                      # 0 = logical core count
    with_descriptions: bool = False

    def __post_init__(self):
        if self.tolerance <= 0:
            raise InvalidCase("tolerance must be positive")
        re0, re1, im0, im1, step = self.grid
        if step <= 0 or re1 < re0 or im1 < im0:
            raise InvalidCase("empty sweep grid")
        if self.outdir is not None:
            os.makedirs(self.outdir, exist_ok=True)
            if not os.access(self.outdir, os.W_OK):
                raise InvalidCase(f"output directory {self.outdir!r} is not writable")

    @property
    def effective_jobs(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)


M_ALIASES = {"minus": "minus", "min": "minus", "one": "one", "1": "one",
             "plus": "plus", "pl": "plus"}


def _parse_case_filter(text: str) -> dict:
    out = {}
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "=" not in piece:
            raise InvalidCase(f"bad case filter component {piece!r}")
        key, value = piece.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key == "l":
            out["l"] = int(value)
        elif key == "m":
            if value not in M_ALIASES:
                raise InvalidCase(f"unknown m kind {value!r}")
            out["m_kind"] = M_ALIASES[value]
        elif key == "d":
            out["d"] = int(value)
        else:
            raise InvalidCase(f"unknown case filter key {key!r}")
    return out


def _parse_grid(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 5:
        raise InvalidCase("grid format is re_min:re_max:im_min:im_max:step")
    return tuple(Fraction(p) for p in parts)


# -- certify -------------------------------------------------------------------------


def _bundle_for_key(key: str):
    from modestab.cases import family_by_key

    return certify_mod.certify_case(family_by_key(key))


def _run_bundles(families: list, jobs: int) -> list:
    keys = [case.key for case in families]
    if jobs == 1 or len(keys) <= 1:
        bundles = [_bundle_for_key(k) for k in keys]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(keys))) as pool:
            bundles = list(pool.map(_bundle_for_key, keys))
    order = {k: i for i, k in enumerate(keys)}
    return sorted(bundles, key=lambda b: order[b.case.key])


def cmd_certify(config: RunConfig, out=sys.stdout) -> int:
    if config.l == 0:
        return _certify_l0(config, out)
    families = select_families(config.l, config.m_kind, config.d)
    if not families:
        print("no families match the selection", file=sys.stderr)
        return 2
    bundles = _run_bundles(families, config.effective_jobs)
    all_pass = True
    for bundle in bundles:
        status = "pass" if bundle.passed else "FAIL"
        line = f"{bundle.case.key:16s} [{bundle.case.describe()}] {status}"
        extras = []
        for cert in bundle.certificates:
            if cert.fallback is not None:
                extras.append(f"{cert.target}: discriminant fallback "
                              f"({'pass' if cert.fallback.ok else 'fail'})")
            if not cert.verdict:
                extras.append(f"{cert.target}: {cert.witness}")
        print(line, file=out)
        for extra in extras:
            print(f"    {extra}", file=out)
        all_pass = all_pass and bundle.passed
    print(f"{sum(b.passed for b in bundles)}/{len(bundles)} case families certified",
          file=out)
    if config.outdir:
        path = os.path.join(config.outdir, "certificates.txt")
        with open(path, "w") as fh:
            fh.write("\n\n".join(certify_mod.serialize_bundle(b) for b in bundles))
            fh.write("\n")
        print(f"machine report written to {path}", file=out)
    return 0 if all_pass else 1


def _certify_l0(config: RunConfig, out) -> int:
    """The l = 0 sector has a closed-form series; no recurrence certificate."""
    ds = [config.d] if config.d else list(range(4, 10))
    ok = True
    for d in ds:
        rep = odeverify.hypergeometric_check(d, 0, n_max=2000, exact_cap=50)
        ok = ok and rep.ratio_identity_symbolic and rep.converges_to_unit_radius
    print("l=0: hypergeometric route (closed-form series; no recurrence "
          "certificate); unit radius of convergence confirmed for "
          f"d in {ds}: {'pass' if ok else 'FAIL'}", file=out)
    return 0 if ok else 1


# -- emit-csv ------------------------------------------------------------------------


def _csv_rows_for_family(case: CaseSpec, bundle) -> list:
    rc = rec_mod.coeffs(case)
    n0 = start_index_case(case)
    aux_len = n0
    iterates = rec_mod.r_iterates(case, n0)
    rt = quasi_mod.rtilde(case)
    aux = quasi_mod.auxiliary(case)
    values = {
        "A": to_expression(rc.A),
        "B": to_expression(rc.B),
        "N": str(n0),
        "d_0": str(case.d_start),
        "l_0": str(case.l_start),
        "r_N": to_expression(iterates[n0]),
        "rtilde": to_expression(rt.expr),
        "delta_N": to_expression(aux.delta_start),
        "C": to_expression(aux.C),
        "epsilon": to_expression(aux.epsilon),
        "bounddelta": to_expression(poly_in_t(bundle.by_target("delta_N").polynomial)),
        "boundC": to_expression(poly_in_t(bundle.by_target("C").polynomial)),
        "boundepsilon": to_expression(poly_in_t(bundle.by_target("epsilon").polynomial)),
    }
    return [(key, values[key]) for key in CSV_KEYS]


def cmd_emit_csv(config: RunConfig, out=sys.stdout) -> int:
    if config.outdir is None:
        print("emit-csv requires --outdir", file=sys.stderr)
        return 2
    families = select_families(config.l, config.m_kind, config.d)
    if not families:
        print("no families match the selection", file=sys.stderr)
        return 2
    bundles = _run_bundles(families, config.effective_jobs)
    for case, bundle in zip(families, bundles):
        rows = _csv_rows_for_family(case, bundle)
        path = os.path.join(config.outdir, family_filename(case))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if config.with_descriptions:
                writer.writerow(["name", "value", "description"])
                for key, value in rows:
                    writer.writerow([key, value, CSV_DESCRIPTIONS[key]])
            else:
                writer.writerow(["name", "value"])
                for key, value in rows:
                    writer.writerow([key, value])
        print(f"wrote {path}", file=out)
    return 0


def read_csv_expressions(path: str) -> dict:
    """Parse an emitted data file back into exact expressions."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["name", "value"]:
            raise InvalidCase(f"unexpected header in {path}: {header}")
        for row in reader:
            key, value = row[0], row[1]
            if key in ("N", "d_0", "l_0"):
                out[key] = int(value)
            else:
                out[key] = parse_expression(value)
    return out


# -- sweep ----------------------------------------------------------------------------


def cmd_sweep(config: RunConfig, out=sys.stdout) -> int:
    if config.l is None or config.m_kind is None or config.d is None:
        print("sweep requires a concrete case: --case l=..,m=..,d=..", file=sys.stderr)
        return 2
    import numpy as np

    re0, re1, im0, im1, step = config.grid
    if re0 != 0 or im0 != -im1:
        # the iteration itself is agnostic; the canonical grid is symmetric
        pass
    lam, ratios = rec_mod.sweep_grid(config.d, config.l, config.m_kind,
                                     re1, im1, step, config.n_max)
    second_root = -1.0 / (config.d - 2)
    err = np.abs(ratios - 1.0)
    toward_second = np.abs(ratios - second_root) <= err
    bad = (err >= config.tolerance) | toward_second
    print(f"case d={config.d}, l={config.l}, m={config.m_kind}: "
          f"{lam.size} grid points, n_max={config.n_max}", file=out)
    print(f"characteristic roots: 1 and -1/(d-2) = -1/{config.d - 2}", file=out)
    print(f"max |r_n - 1| on grid: {float(np.max(err)):.3e} "
          f"(tolerance {config.tolerance:g})", file=out)
    n_bad = int(np.count_nonzero(bad))
    if n_bad:
        idx = np.argsort(-err)
        shown = 0
        for i in idx:
            if not bad[i]:
                continue
            print(f"  flagged lambda = {lam[i]:.3f}: r_n = {ratios[i]:.8f} "
                  f"(|r-1| = {err[i]:.3e}"
                  f"{', drifting toward -1/(d-2)' if toward_second[i] else ''})",
                  file=out)
            shown += 1
            if shown >= 8:
                print(f"  ... {n_bad - shown} more flagged points", file=out)
                break
    print(f"{lam.size - n_bad}/{lam.size} grid points within tolerance; "
          f"none near -1/(d-2)" if not np.any(toward_second) else
          "WARNING: some points drift toward -1/(d-2)", file=out)
    if config.outdir:
        path = os.path.join(config.outdir,
                            f"sweep_{config.l}_{config.m_kind}_{config.d}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["re_lambda", "im_lambda", "re_r", "im_r", "abs_err"])
            for z, r, e in zip(lam, ratios, err):
                writer.writerow([repr(z.real), repr(z.imag), repr(r.real),
                                 repr(r.imag), repr(float(e))])
        print(f"sweep table written to {path}", file=out)
    return 1 if n_bad else 0


# -- casimir -------------------------------------------------------------------------


def cmd_casimir(config: RunConfig, out=sys.stdout) -> int:
    if config.d is None or config.l is None:
        print("casimir requires --d and --l", file=sys.stderr)
        return 2
    try:
        report = casimir_mod.eigen_check(config.d, config.l)
        identity = casimir_mod.casimir_identity_check(config.d, config.l)
    except (casimir_mod.MinimalPolynomialFailed, casimir_mod.IdentityFailed,
            casimir_mod.InvarianceViolated) as exc:
        print(f"FAIL: {exc}", file=out)
        return 1
    pairs = ", ".join(f"{mu} (multiplicity {m})"
                      for mu, m in zip(report.eigenvalues, report.multiplicities))
    print(f"d={config.d}, l={config.l}: eigenvalues {pairs}", file=out)
    print(f"dimension {report.dimension} = d * dim(harmonics); "
          f"multiplicity sum {'matches' if report.multiplicities_sum_ok else 'MISMATCH'}",
          file=out)
    print(f"minimal polynomial identity: {'pass' if report.minimal_polynomial_ok else 'FAIL'}",
          file=out)
    print(f"casimir identity: {'pass' if identity else 'FAIL'}", file=out)
    if report.radial_field_contained is not None:
        print(f"radial field in top eigenspace: "
              f"{'yes' if report.radial_field_contained else 'NO'}", file=out)
    if report.rank_cross_checked:
        print("eigenspace dimensions cross-checked by exact rank", file=out)
    ok = report.ok and identity
    return 0 if ok else 1


# -- ode-verify ------------------------------------------------------------------------


def cmd_ode_verify(args, out=sys.stdout) -> int:
    run_all = not (args.symmetry_modes or args.susy or args.heun or args.indicial)
    ok = True
    if args.symmetry_modes or run_all:
        residuals = odeverify.symmetry_mode_residuals()
        zero = sum(1 for r in residuals.values() if r.is_zero)
        print(f"symmetry modes: {zero}/{len(residuals)} residuals zero "
              f"(d symbolic)", file=out)
        ok = ok and zero == len(residuals)
    if args.susy or run_all:
        try:
            odeverify.susy_factor_check()
            print("factorization identities: 6/6 hold (d symbolic)", file=out)
        except odeverify.IdentityFailed as exc:
            print(f"factorization identities: FAIL ({exc})", file=out)
            ok = False
    if args.heun or run_all:
        rows = [(None, 0, None), (None, 1, "plus"), (None, 1, "one"),
                (None, 2, "plus"), (None, 1, "minus"), (None, 2, "one"),
                (None, 2, "minus"), (None, None, "minus"), (None, None, "one"),
                (None, None, "plus")]
        good = 0
        for d, l, mk in rows:
            chain = odeverify.heun_normal_form(d, l, mk)
            table = odeverify.heun_coeffs(d, l, mk)
            good += chain.same_as(table)
        print(f"normal-form chain: {good}/{len(rows)} rows match the tabulated "
              f"coefficients", file=out)
        ok = ok and good == len(rows)
    if args.indicial or run_all:
        dd = RatFunc.variable("d")
        ll = RatFunc.variable("l")
        r1, r2 = odeverify.indicial_roots(
            odeverify.mode_ode(None, None, "plus", "original"), 0)
        first = {str(0): (r1 == ll and r2 == -(ll + dd - 2))}
        s1, s2 = odeverify.indicial_roots(odeverify.mode_ode(None, 0, None, "tilde"), 0)
        second = s1 == RatFunc.coerce(2) and s2 == -dd
        good = first["0"] and second
        print(f"indicial roots: generic {{l, -(l+d-2)}} and removed-sector "
              f"{{2, -d}} {'confirmed' if good else 'FAIL'}", file=out)
        ok = ok and good
    return 0 if ok else 1


# -- wall -----------------------------------------------------------------------------


def cmd_wall(args, out=sys.stdout) -> int:
    try:
        f = parse_expression(args.poly)
    except ValueError as exc:
        print(f"cannot parse polynomial: {exc}", file=sys.stderr)
        return 2
    if not f.den.is_const():
        print("wall expects a polynomial, not a quotient", file=sys.stderr)
        return 2
    poly = f.as_poly()
    expansion = certify_mod.wall_continued_fraction(poly)
    if not expansion.ok:
        print(f"expansion degenerate: {expansion.failure} -> not Hurwitz-certified",
              file=out)
        return 1
    for i, c in enumerate(expansion.coefficients, start=1):
        print(f"c{i} = {c}", file=out)
    verdict = expansion.hurwitz
    print(f"all coefficients positive: {'yes -> Hurwitz' if verdict else 'no'}",
          file=out)
    return 0 if verdict else 1


# -- argument parsing --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modestab",
        description="exact certification toolkit for the spectral analysis of "
                    "self-similar wave-map blowup")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, sweepish=False):
        p.add_argument("--case", default=None,
                       help="filter, e.g. l=1,m=minus,d=4 (m: minus/one/plus)")
        p.add_argument("--all", action="store_true", help="select every family")
        p.add_argument("--outdir", default=None)
        p.add_argument("--jobs", type=int, default=0,
                       help="parallel workers (0 = logical cores, 1 = sequential)")
        if sweepish:
            p.add_argument("--grid", default="0:5:-5:5:1/2",
                           help="re_min:re_max:im_min:im_max:step (exact rationals)")
            p.add_argument("--nmax", type=int, default=5000)
            p.add_argument("--tol", type=float, default=1e-6)

    add_common(sub.add_parser("certify", help="run certificate bundles"))
    pe = sub.add_parser("emit-csv", help="write per-family data files")
    add_common(pe)
    pe.add_argument("--with-descriptions", action="store_true")
    add_common(sub.add_parser("sweep", help="numeric ratio sweep"), sweepish=True)

    pc = sub.add_parser("casimir", help="angular-operator checks")
    pc.add_argument("--d", type=int, required=True)
    pc.add_argument("--l", type=int, required=True)

    po = sub.add_parser("ode-verify", help="ODE-layer identity checks")
    po.add_argument("--symmetry-modes", action="store_true")
    po.add_argument("--susy", action="store_true")
    po.add_argument("--heun", action="store_true")
    po.add_argument("--indicial", action="store_true")

    pw = sub.add_parser("wall", help="continued-fraction stability expansion")
    pw.add_argument("--poly", required=True,
                    help="monic real polynomial in the expression grammar")
    return parser


def _config_from_args(args) -> RunConfig:
    filters = {}
    if getattr(args, "case", None):
        filters = _parse_case_filter(args.case)
    grid = _parse_grid(args.grid) if getattr(args, "grid", None) else \
        (Fraction(0), Fraction(5), Fraction(-5), Fraction(5), Fraction(1, 2))
    return RunConfig(
        command=args.command,
        l=filters.get("l"),
        m_kind=filters.get("m_kind"),
        d=filters.get("d"),
        grid=grid,
        n_max=getattr(args, "nmax", 5000),
        tolerance=getattr(args, "tol", 1e-6),
        outdir=getattr(args, "outdir", None),
        jobs=getattr(args, "jobs", 0),
        with_descriptions=getattr(args, "with_descriptions", False),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "certify":
            return cmd_certify(_config_from_args(args))
        if args.command == "emit-csv":
            return cmd_emit_csv(_config_from_args(args))
        if args.command == "sweep":
            return cmd_sweep(_config_from_args(args))
        if args.command == "casimir":
            config = RunConfig(command="casimir", d=args.d, l=args.l)
            return cmd_casimir(config)
        if args.command == "ode-verify":
            return cmd_ode_verify(args)
        if args.command == "wall":
            return cmd_wall(args)
    except InvalidCase as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
