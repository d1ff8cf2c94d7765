"""``luinv`` command-line interface.

Exit codes: 0 Equivalent / success, 1 Inequivalent (or oracle not converged,
or a failed self-test), 2 Indeterminate, 64 usage error, 65 bad input data,
70 I/O or internal error.
"""
import argparse
import json
import sys

import numpy as np

from . import battery
from .equivalence import Outcome, decide, pure_witness, pure_residual
from .errors import LUInvError
from .invariants import fingerprint, fingerprint_to_dict, pure_invariants
from .io import dumps_state, read_state, atomic_write
from .linalg import ToleranceConfig, random_density, random_haar_unitary, random_pure_coefficients
from .oracle import optimize_local, pure_oracle
from .states import LocalUnitaryPair, PureState, apply_local, schmidt, validate
from .store import FingerprintStore

EX_OK, EX_INEQUIVALENT, EX_INDETERMINATE = 0, 1, 2
EX_USAGE, EX_DATAERR, EX_SOFTWARE = 64, 65, 70

VERDICT_EXIT = {Outcome.EQUIVALENT: EX_OK, Outcome.INEQUIVALENT: EX_INEQUIVALENT,
                Outcome.INDETERMINATE: EX_INDETERMINATE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _cfg(args):
    tol = getattr(args, "tol", None)
    if tol is None:
        return ToleranceConfig()
    try:
        return ToleranceConfig(eq_tol=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_gen(args):
    if args.lu_of:
        state = read_state(args.lu_of)
        rng = np.random.default_rng(args.seed)
        lu = LocalUnitaryPair(random_haar_unitary(state.N, rng=rng),
                              random_haar_unitary(state.N, rng=rng))
        state = apply_local(state, lu)
    else:
        if args.n is None or args.n < 2:
            raise UsageError("--n must be at least 2")
        if args.kind == "pure":
            state = validate(random_pure_coefficients(args.n, seed=args.seed), args.n, "pure")
        else:
            state = validate(random_density(args.n ** 2, seed=args.seed), args.n, "mixed")
    text = dumps_state(state)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EX_OK


def cmd_fingerprint(args):
    cfg = _cfg(args)
    state = read_state(args.state, cfg)
    rho = state.density() if isinstance(state, PureState) else state
    fp = fingerprint(rho, cfg)
    out = {"kind": "pure" if isinstance(state, PureState) else "mixed"}
    out.update(fingerprint_to_dict(fp))
    if isinstance(state, PureState):
        out["schmidt"] = np.round(schmidt(state), 10).tolist()
        out["I"] = np.round(pure_invariants(state), 10).tolist()
    if args.store:
        key, hit = FingerprintStore(args.store).put(fp, label=args.label or args.state)
        out["store"] = {"key": key, "hit": hit}
    _emit(out)
    return EX_OK


def _load_pair(args, cfg):
    a = read_state(args.a, cfg)
    b = read_state(args.b, cfg)
    if type(a) is not type(b):
        raise LUInvError("cannot compare a pure state with a mixed state")
    if a.N != b.N:
        raise LUInvError(f"local dimensions differ: {a.N} vs {b.N}")
    return a, b


def cmd_compare(args, force_witness=False):
    cfg = _cfg(args)
    a, b = _load_pair(args, cfg)
    if isinstance(a, PureState):
        verdict = decide(a, b, cfg)
        if args.oracle:
            verdict.detail["oracle"] = {"schmidt_match": pure_oracle(a, b, cfg)}
    else:
        verdict = decide(a, b, cfg, use_oracle=args.oracle, oracle_seed=args.seed,
                         restarts=args.restarts)
    record = verdict.to_dict()
    if not (args.witness or force_witness):
        record.pop("witness", None)
    _emit(record)
    return VERDICT_EXIT[verdict.outcome]


def cmd_witness(args):
    return cmd_compare(args, force_witness=True)


def cmd_oracle(args):
    cfg = _cfg(args)
    a, b = _load_pair(args, cfg)
    if isinstance(a, PureState):
        ok = pure_oracle(a, b, cfg)
        out = {"converged": ok}
        if ok:
            out["best_cost"] = pure_residual(a, b, pure_witness(a, b))
        _emit(out)
        return EX_OK if ok else EX_INEQUIVALENT
    rep = optimize_local(a, b, restarts=args.restarts, max_iter=args.max_iter,
                         seed=args.seed, cfg=cfg)
    _emit(rep.to_dict())
    return EX_OK if rep.converged else EX_INEQUIVALENT


def cmd_selftest(args):
    cfg = _cfg(args)
    failed = 0
    for name, fn in battery.CHECKS:
        res = battery.run_check(name, fn, args.seed, args.trials, cfg)
        print(res.line(), flush=True)
        failed += not res.passed
    total = len(battery.CHECKS)
    print(f"{total - failed}/{total} checks passed")
    return EX_OK if failed == 0 else EX_INEQUIVALENT


def build_parser():
    p = _Parser(prog="luinv", description="Local-unitary invariants of bipartite states.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a random state file")
    g.add_argument("--n", type=int, help="local dimension N")
    g.add_argument("--kind", choices=["pure", "mixed"], default="mixed")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lu-of", metavar="PATH",
                   help="instead of sampling, apply a seeded random local unitary to PATH")
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fingerprint", help="print the invariant fingerprint of a state")
    f.add_argument("state")
    f.add_argument("--tol", type=float)
    f.add_argument("--store", metavar="DIR", help="record the fingerprint in DIR")
    f.add_argument("--label", help="label stored with the record")
    f.set_defaults(func=cmd_fingerprint)

    for name, func, help_ in (("compare", cmd_compare, "decide LU-equivalence"),
                              ("witness", cmd_witness, "decide and print (u, w)")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("a")
        c.add_argument("b")
        c.add_argument("--witness", action="store_true", help="include (u, w)")
        c.add_argument("--oracle", action="store_true", help="cross-check numerically")
        c.add_argument("--tol", type=float)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--restarts", type=int, default=20)
        c.set_defaults(func=func)

    o = sub.add_parser("oracle", help="run only the numerical optimization oracle")
    o.add_argument("a")
    o.add_argument("b")
    o.add_argument("--tol", type=float)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--restarts", type=int, default=20)
    o.add_argument("--max-iter", type=int, default=500)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("selftest", help="run the property battery")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, help="cap on random instances per check")
    s.add_argument("--tol", type=float)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0, parse errors exit EX_USAGE
        return exc.code
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"luinv: usage error: {exc}", file=sys.stderr)
        return EX_USAGE
    except LUInvError as exc:
        print(f"luinv: invalid input: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"luinv: {exc}", file=sys.stderr)
        return EX_SOFTWARE
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"luinv: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
