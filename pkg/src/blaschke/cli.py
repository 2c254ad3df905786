"""Command-line front end: classify, verify, julia, basis, transfer.

Exit codes: 0 success, 1 solver failure, 2 input error, 3 ambiguous classification,
4 identity-verification failure, 5 sampler/classifier contradiction.
"""
from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .core import moebius_classify
from .dynamics import (
    JuliaType,
    algebra_report,
    backward_sample,
    julia_from_class,
    classify_dynamics,
    max_gap,
)
from .errors import AmbiguousClassificationError, BlaschkeError, DomainError
from .hardy import covariant_defect, cuntz_defect, h2_basis_gram_defect
from .specfile import load_spec
from .transfer import (
    SymbolFunction,
    aleksandrov_grid,
    grid_nodes,
    poisson_mass_residual,
    tm_basis,
    tm_orthonormality_defect,
)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2
EXIT_AMBIGUOUS = 3
EXIT_VERIFY = 4
EXIT_CONTRADICTION = 5

JSON_KEYS = (
    "degree", "w0", "multiplier", "class", "julia", "simple",
    "k0", "k1", "identity_class", "structure", "quotient",
)
DEFAULT_SYMBOLS = "e1,e-1,e2,rand4"
# Empirical gap thresholds for the julia contradiction check.
FULL_CIRCLE_MAX_GAP = 0.2
CANTOR_MIN_GAP = 0.05
CONTRADICTION_MIN_COUNT = 10_000
BASIS_TOL = 1e-8
MAX_PRINTED_COEFFS = 8


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.15g}{z.imag:+.15g}i"


def _fmt_bool(b) -> str:
    return "none" if b is None else str(bool(b)).lower()


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


# --- classify -----------------------------------------------------------------


def _classify_fields(B, args) -> dict:
    rep = algebra_report(B, q_max=args.q_max, boundary_tol=args.boundary_tol,
                         parabolic_tol=args.parabolic_tol)
    f = dict.fromkeys(JSON_KEYS, "none")
    f["degree"] = str(B.degree)
    f["k0"], f["k1"] = str(rep.k0), str(rep.k1)
    f["structure"] = rep.structure_string
    if rep.identity_class is not None:
        f["identity_class"] = "({},{})".format(*rep.identity_class)
    if rep.quotient_note:
        f["quotient"] = rep.quotient_note
    if B.degree == 1:
        f["class"] = str(moebius_classify(B, q_max=args.q_max))
        return f
    fp = rep.dynamics.fixed_point
    f["w0"] = _fmt_complex(fp.point)
    f["multiplier"] = _fmt_complex(fp.multiplier)
    f["class"] = rep.dynamics.kind.value
    f["julia"] = rep.julia.value
    f["simple"] = _fmt_bool(rep.simple)
    return f


def run_classify(args) -> int:
    B = load_spec(args.spec).product
    f = _classify_fields(B, args)
    if args.json:
        print(";".join(f"{k}={f[k]}" for k in JSON_KEYS))
        return EXIT_OK
    print(f"degree: {f['degree']}")
    if B.degree >= 2:
        print(f"Denjoy-Wolff point: {f['w0']}")
        print(f"multiplier: {f['multiplier']}")
    print(f"class: {f['class']}")
    print(f"structure: {f['structure']}")
    if f["quotient"] != "none":
        print(f"quotient: {f['quotient']}")
    if B.degree >= 2:
        print(f"{f['class']}; Julia={f['julia']}; simple={f['simple']}; K0={f['k0']}; K1={f['k1']}")
    else:
        print(f"{f['class']}; K0={f['k0']}; K1={f['k1']}")
    return EXIT_OK


# --- verify -------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyRecord:
    identity: str
    cutoff: int
    defect: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.tol)


@dataclass(frozen=True)
class VerifyReport:
    records: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)


_SYMBOL_RE = re.compile(r"^(?:e(-?\d+)|rand(\d+))$")


def parse_symbol_name(name: str, grid: int, seed: int) -> SymbolFunction:
    """``eK`` is ``z^K``; ``randK`` is a seeded random trig polynomial of bandwidth ``K``."""
    m = _SYMBOL_RE.match(name.strip())
    if not m:
        raise InputError(f"unknown symbol '{name}' (expected eK or randK)")
    if m.group(1) is not None:
        return SymbolFunction.monomial(int(m.group(1)), grid)
    K = int(m.group(2))
    rng = np.random.Generator(np.random.PCG64(seed))
    c = rng.standard_normal((2 * K + 1, 2))
    return SymbolFunction.from_coefficients(
        {k: complex(*c[k + K]) for k in range(-K, K + 1)}, grid
    )


def verify_report(B, N: int, symbols: Sequence[str], tol: float, seed: int = 0) -> VerifyReport:
    if N < 32 or N > 2048 or N & (N - 1):
        raise InputError(f"cutoff must be a power of two in [32, 2048], got {N}")
    if N < 16 * B.degree:
        raise InputError(f"cutoff must be >= 16 * degree = {16 * B.degree}")
    grid = 2 * N
    recs = []
    for name in symbols:
        a = parse_symbol_name(name, grid, seed)
        if a.bandwidth() > N // 4:
            raise InputError(f"symbol {name} has bandwidth above N/4 = {N // 4}")
        recs.append(VerifyRecord(f"covariant[{name.strip()}]", N, covariant_defect(B, a, N), tol))
    cd = cuntz_defect(B, N)
    recs.append(VerifyRecord("cuntz_offdiag", N, cd.offdiag, tol))
    recs.append(VerifyRecord("cuntz_completeness", N, cd.completeness, tol))
    recs.append(VerifyRecord("tm_orthonormality", N, tm_orthonormality_defect(B, max(N, 64)), tol))
    kmax = min(3, N // (2 * B.degree) - 1)
    recs.append(VerifyRecord(f"h2_basis_gram[kmax={kmax}]", N, h2_basis_gram_defect(B, N, kmax), tol))
    return VerifyReport(tuple(recs))


def run_verify(args) -> int:
    B = load_spec(args.spec).product
    symbols = [s for s in args.symbols.split(",") if s.strip()]
    rep = verify_report(B, args.cutoff, symbols, args.tol, args.seed)
    header = ("identity", "cutoff", "defect", "tol", "status")
    rows = [(r.identity, r.cutoff, f"{r.defect:.6e}", f"{r.tol:.1e}", "PASS" if r.passed else "FAIL")
            for r in rep.records]
    if args.out:
        _write_csv(args.out, header, rows)
    width = max(len(r[0]) for r in rows)
    print(f"{'identity':<{width}}  {'N':>5}  {'defect':>12}  {'tol':>8}  status")
    for r in rows:
        print(f"{r[0]:<{width}}  {r[1]:>5}  {r[2]:>12}  {r[3]:>8}  {r[4]}")
    print(f"overall: {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


# --- julia --------------------------------------------------------------------


def run_julia(args) -> int:
    B = load_spec(args.spec).product
    if B.degree < 2:
        raise InputError("julia requires degree ≥ 2")
    if args.count < 100 or args.burn_in < 50:
        raise InputError("julia needs --count >= 100 and --burn-in >= 50")
    kind = classify_dynamics(B)
    jt = julia_from_class(kind)
    s = backward_sample(B, args.count, args.seed, args.burn_in)
    gap = max_gap(s)
    if args.out:
        _write_csv(args.out, ("index", "angle_radians"),
                   ((i, repr(float(a))) for i, a in enumerate(s.angles)))
    print(f"count={s.count} seed={s.seed} burn_in={s.burn_in}")
    print(f"max_gap={gap:.6f}")
    print(f"analytic_julia={jt.value}")
    if args.count >= CONTRADICTION_MIN_COUNT:
        if jt is JuliaType.FULL_CIRCLE and gap > FULL_CIRCLE_MAX_GAP:
            print(f"contradiction: gap {gap:.6f} > {FULL_CIRCLE_MAX_GAP} for a FullCircle Julia set",
                  file=sys.stderr)
            return EXIT_CONTRADICTION
        if jt is JuliaType.CANTOR and gap < CANTOR_MIN_GAP:
            print(f"contradiction: gap {gap:.6f} < {CANTOR_MIN_GAP} for a Cantor Julia set",
                  file=sys.stderr)
            return EXIT_CONTRADICTION
    return EXIT_OK


# --- basis --------------------------------------------------------------------


def _check_grid(M: int) -> None:
    if M < 64 or M & (M - 1):
        raise InputError(f"--grid must be a power of two >= 64, got {M}")


def run_basis(args) -> int:
    B = load_spec(args.spec).product
    _check_grid(args.grid)
    nodes = grid_nodes(args.grid)
    angles = 2.0 * np.pi * np.arange(args.grid) / args.grid
    if args.out:
        U = tm_basis(B).evaluate_all(nodes)
        rows = ((i + 1, repr(float(angles[j])), repr(float(U[j, i].real)), repr(float(U[j, i].imag)))
                for i in range(B.degree) for j in range(args.grid))
        _write_csv(args.out, ("i", "node_angle", "re(u_i)", "im(u_i)"), rows)
    d = tm_orthonormality_defect(B, args.grid)
    print(f"orthonormality_defect={d:.6e}")
    if d > BASIS_TOL:
        print(f"orthonormality defect exceeds {BASIS_TOL:.0e}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# --- transfer -----------------------------------------------------------------


def parse_coefficients(text: str) -> dict:
    """``"k=c,k=c"`` with integer ``k`` and Python complex literals ``c``."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise InputError(f"malformed symbol term '{item}' (expected k=c)")
        k, c = item.split("=", 1)
        try:
            out[int(k)] = out.get(int(k), 0) + complex(c.strip().replace("i", "j"))
        except ValueError:
            raise InputError(f"malformed symbol term '{item}'") from None
    if not out:
        raise InputError("empty symbol")
    return out


def run_transfer(args) -> int:
    B = load_spec(args.spec).product
    _check_grid(args.grid)
    coeffs = parse_coefficients(args.symbol)
    if max(abs(k) for k in coeffs) > args.grid // 4:
        raise InputError(f"symbol bandwidth exceeds grid/4 = {args.grid // 4}")
    a = SymbolFunction.from_coefficients(coeffs, args.grid)
    out = aleksandrov_grid(B, a)
    if args.out:
        M = args.grid
        ang = 2.0 * np.pi * np.arange(M) / M
        s, c, k = out.samples, out.coeffs, out.frequencies
        rows = ((j, repr(float(ang[j])), repr(float(s[j].real)), repr(float(s[j].imag)),
                 int(k[j]), repr(float(c[j].real)), repr(float(c[j].imag))) for j in range(M))
        _write_csv(args.out, ("index", "node_angle", "re(sample)", "im(sample)",
                              "frequency", "re(coeff)", "im(coeff)"), rows)
    big = [(int(k), v) for k, v in zip(out.frequencies, out.coeffs) if abs(v) > 1e-10]
    if not big:
        print("coefficients: none above 1e-10")
    elif len(big) <= MAX_PRINTED_COEFFS:
        print("coefficients: " + ", ".join(f"{k}={_fmt_complex(v)}" for k, v in big))
    else:
        print(f"coefficients: {len(big)} above 1e-10, frequencies {big[0][0]}..{big[-1][0]}")
    print(f"poisson_mass_residual={poisson_mass_residual(B, args.grid):.6e}")
    return EXIT_OK


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blaschke",
        description="Dynamics, transfer operators and Hardy-space identities for finite Blaschke products.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser(
        "classify", help="dynamical class, Julia type and K-groups",
        description="Classify the boundary dynamics and report the associated algebra.",
        epilog="--json prints one line, key=value pairs separated by ';' in the order: "
        + ", ".join(JSON_KEYS) + ". Absent values print as 'none'.",
    )
    c.add_argument("spec")
    c.add_argument("--parabolic-tol", type=float, default=1e-8)
    c.add_argument("--boundary-tol", type=float, default=1e-8)
    c.add_argument("--q-max", type=int, default=10_000)
    c.add_argument("--json", action="store_true", help="single-line key=value output")
    c.set_defaults(func=run_classify)

    v = sub.add_parser("verify", help="check the operator identities on finite sections")
    v.add_argument("spec")
    v.add_argument("--cutoff", type=int, default=256, help="power of two in [32, 2048]")
    v.add_argument("--symbols", default=DEFAULT_SYMBOLS,
                   help="comma list of eK (z^K) and randK (random, bandwidth K)")
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--seed", type=int, default=0, help="seed for randK symbols")
    v.add_argument("--out", help="also write the table as CSV")
    v.set_defaults(func=run_verify)

    j = sub.add_parser("julia", help="backward-orbit sample of the Julia set")
    j.add_argument("spec")
    j.add_argument("--count", type=int, default=10_000)
    j.add_argument("--seed", type=int, default=1)
    j.add_argument("--burn-in", type=int, default=100)
    j.add_argument("--out", help="CSV path (index,angle_radians)")
    j.set_defaults(func=run_julia)

    b = sub.add_parser("basis", help="sample the Takenaka-Malmquist functions")
    b.add_argument("spec")
    b.add_argument("--grid", type=int, default=256)
    b.add_argument("--out", help="CSV path (i,node_angle,re(u_i),im(u_i))")
    b.set_defaults(func=run_basis)

    t = sub.add_parser("transfer", help="apply the transfer operator to a trig polynomial")
    t.add_argument("spec")
    t.add_argument("--symbol", default="0=1", help="Fourier coefficients as 'k=c,...', e.g. '2=1,-1=0.5j'")
    t.add_argument("--grid", type=int, default=256)
    t.add_argument("--out", help="CSV path for samples and coefficients")
    t.set_defaults(func=run_transfer)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AmbiguousClassificationError as exc:
        margins = ", ".join(f"{k}={v:.3e}" for k, v in exc.margins.items())
        print(f"ambiguous: {exc} [{margins}]", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BlaschkeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
