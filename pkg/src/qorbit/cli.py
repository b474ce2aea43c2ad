"""Command-line front end: `qorbit <command> ...` prints one JSON document.

Exit codes: 0 success, 2 validation error, 3 guard violation, 4 failed invariant or suite.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import traceback
from fractions import Fraction
from importlib import resources
from typing import Any, Dict, List, Optional, Sequence, Tuple

EXIT_OK, EXIT_VALIDATION, EXIT_GUARD, EXIT_INVARIANT = 0, 2, 3, 4


class CLIError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.message, self.extra = code, kind, message, extra

    def to_json(self) -> dict:
        return {"error": dict({"kind": self.kind, "message": self.message}, **self.extra)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print usage and exit 2; emit JSON instead
        raise CLIError(EXIT_VALIDATION, "usage", message)


def _cap_threads() -> None:
    n = os.environ.get("QORBIT_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


# ---------------------------------------------------------------- parsing helpers

def _ints(s: str) -> List[int]:
    return [int(x) for x in s.split(",") if x.strip()]


def _rats(s: str) -> List[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _frac(x) -> Fraction:
    return Fraction(str(x).replace(" ", "")) if not isinstance(x, int) else Fraction(x)


def _real(x):
    """Exact Fraction when the input is an integer or p/q string, float otherwise."""
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    s = str(x).strip()
    try:
        return Fraction(s) if ("." not in s and "e" not in s.lower()) else float(s)
    except ValueError:
        return float(s)


def _fmt(x) -> str:
    from .exactmath import fmt_frac
    if isinstance(x, (int, Fraction)):
        return fmt_frac(Fraction(x))
    return f"{float(x):.17g}"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("qorbit").joinpath("schemas", f"{name}.json").read_text())


def validate(name: str, params: dict) -> None:
    import jsonschema
    try:
        jsonschema.validate(params, load_schema(name))
    except jsonschema.ValidationError as e:
        raise CLIError(EXIT_VALIDATION, "schema", e.message, path=[str(p) for p in e.absolute_path])


# ---------------------------------------------------------------- datum plumbing

def _system(p: dict):
    from .rootsys import build_root_system
    if "cartan" in p:
        return build_root_system(p["cartan"])
    if "type" in p:
        return build_root_system(p["type"])
    raise CLIError(EXIT_VALIDATION, "missing", "give --type or --cartan")


def _tau(rs, p: dict):
    from .rootsys import Involution
    t = Involution.identity(rs.rank) if "tau" not in p else Involution.from_one_based(p["tau"])
    t.check_automorphism(rs)
    return t


def _datum(p: dict):
    from .exactmath import PolarRational
    from .twistdata import TwistingDatum
    if "datum" in p:
        d = p["datum"]
        if isinstance(d, str):
            with open(d) as f:
                d = json.load(f)
        validate("datum", d)
        clash = [k for k in ("type", "cartan", "tau", "eps") if k in p]
        if clash:
            raise CLIError(EXIT_VALIDATION, "conflict", f"--datum given together with {clash}")
        p = dict(d)
    if "eps" not in p:
        raise CLIError(EXIT_VALIDATION, "missing", "a twisting datum needs eps")
    rs = _system(p)
    tau = _tau(rs, p)
    eps = [PolarRational.from_json(e) for e in p["eps"]]
    return TwistingDatum(rs, tau, eps)


def _weight(p: dict, key: str, rank: int, default=None):
    if key not in p:
        if default is None:
            raise CLIError(EXIT_VALIDATION, "missing", f"{key} is required")
        return default
    w = [_frac(x) for x in p[key]]
    if len(w) != rank:
        raise CLIError(EXIT_VALIDATION, "shape", f"{key} needs {rank} entries, got {len(w)}")
    return tuple(w)


def _q(p: dict, default: str = "1/2") -> Fraction:
    q = _frac(p.get("q", default))
    if not 0 < q < 1:
        raise CLIError(EXIT_VALIDATION, "range", "q must lie in (0, 1)")
    return q


# ---------------------------------------------------------------- commands

def _highest(rs):
    try:
        return [int(x) for x in rs.to_alpha(rs.highest_root())]
    except ValueError:
        return None


def cmd_rootsys(p: dict) -> dict:
    from .rootsys import WEYL_GUARD, weyl_enumerate
    rs = _system(p)
    W = weyl_enumerate(rs, guard=p.get("guard", WEYL_GUARD))
    return {"type": rs.label, "rank": rs.rank, "cartan": [list(r) for r in rs.cartan],
            "symmetrizer": [_fmt(x) for x in rs.d], "rho": [_fmt(x) for x in rs.rho],
            "positive_roots": [list(map(int, b)) for b in rs.positive_roots_alpha],
            "num_roots": 2 * len(rs.positive_roots_alpha),
            "highest_root": _highest(rs),
            "weyl_order": len(W)}


def cmd_fold(p: dict) -> dict:
    from .rootsys import fold
    rs = _system(p)
    fs = fold(rs, _tau(rs, p))
    return {"type": rs.label, "tau": [t + 1 for t in fs.tau.perm], "folded_type": fs.folded_type,
            "non_reduced": fs.non_reduced, "classes": [[r + 1 for r in c] for c in fs.classes],
            "folded_cartan": [[int(x) for x in row] for row in fs.cartan],
            "generators": [g.name() for g in fs.generators], "folded_weyl_order": len(fs.group)}


def cmd_twist(p: dict) -> dict:
    from .twistdata import classify, compact_roots, enumerate_w_minus, strongly_reduce, w_plus
    nu = _datum(p)
    act = p["action"]
    out: Dict[str, Any] = {"datum": nu.to_json()}
    if act == "classify":
        out["flags"] = classify(nu).to_json()
        out["J"] = [r + 1 for r in nu.J]
    elif act == "compact":
        cd = compact_roots(nu)
        out.update(positive_compact=[list(c) for c in cd.positive_coords],
                   simple_compact=[[_fmt(x) for x in b] for b in cd.simple],
                   w_plus=sorted(w.name() for w in cd.group), w_plus_order=len(cd.group))
    elif act == "wminus":
        wm = enumerate_w_minus(nu)
        out.update(w_minus=[w.name() for w, _ in wm], sign_characters=[list(s) for _, s in wm],
                   w_plus_order=len(w_plus(nu)), w_nu_order=len(nu.weyl))
    else:
        red, w, f = strongly_reduce(nu)
        out.update(reduced=red.to_json(), w=w.name(), scaling=[_fmt(x) for x in f])
    return out


def cmd_twine(p: dict) -> dict:
    from .charring import twining_classical, twining_mults
    rs = _system(p)
    tau = _tau(rs, p)
    hw = _weight(p, "weight", rs.rank)
    tab = (twining_classical if p.get("classical") else twining_mults)(rs, tau, hw)
    j = {",".join(str(int(x)) for x in w): v for w, v in tab.jvals.items() if v}
    return {"type": rs.label, "tau": [t + 1 for t in tau.perm], "weight": [int(x) for x in hw], "j": j}


def cmd_hc(p: dict) -> dict:
    from .exactmath import QMono
    from .hc_integral import eval_point, hc_image, hc_image_grouped
    from .twistdata import WeightFunction
    nu = _datum(p)
    hw = _weight(p, "weight", nu.rs.rank)
    el = hc_image(nu, hw)
    out: Dict[str, Any] = {"datum": nu.to_json(), "weight": [int(x) for x in hw], "image": el.to_json()}
    if p.get("grouped"):
        out["grouped_agrees"] = hc_image_grouped(nu, hw) == el
    if "lambda" in p:
        lam = WeightFunction([QMono.from_json(v) for v in p["lambda"]])
        val = eval_point(el, lam)
        out["evaluation"] = val.to_json()
        if "q" in p:
            out["value"] = _fmt(eval_point(el, lam, _q(p)))
    return out


def cmd_integral(p: dict) -> dict:
    from .hc_integral import invariant_integral
    nu = _datum(p)
    gamma = _weight(p, "gamma", nu.rs.rank)
    hw = _weight(p, "weight", nu.rs.rank, default=tuple(Fraction(int(r == 0)) for r in range(nu.rs.rank)))
    val = invariant_integral(nu, gamma, hw, _q(p))
    return dict(val.to_json(), gamma=[_fmt(x) for x in gamma], weight=[int(x) for x in hw])


def cmd_state(p: dict) -> dict:
    from .hc_integral import cell_state, e_gamma, limit_identity, state_value
    from .lowrank_models import case_datum, make_provider
    eps = _frac(p["eps"])
    nu = case_datum(p["case"], eps)
    gamma = _weight(p, "gamma", nu.rs.rank)
    q = _q(p)
    depth = int(p.get("depth", 400))
    prov = make_provider(p["case"], eps, gamma, q)
    cells = cell_state(nu, gamma, prov, depth, q)
    out: Dict[str, Any] = {"datum": nu.to_json(), "gamma": [_fmt(x) for x in gamma],
                           "cells": [c.to_json() for c in cells], "e_gamma": _fmt(float(e_gamma(nu, gamma, q)))}
    if "weight" in p:
        hw = _weight(p, "weight", nu.rs.rank)
        out["state_value"] = _fmt(state_value(nu, gamma, prov, depth, q, hw))
    if "n" in p:
        out["limit_identity"] = [{k: (v if isinstance(v, str) else _fmt(v)) for k, v in row.items()}
                                 for row in limit_identity(nu, gamma, prov, depth, q, int(p["n"]))]
    return out


def _stratum(p: dict):
    from .lowrank_models import h2_stratify, stratum_minus, stratum_plus, stratum_zero
    q = _q(p)
    kind = p.get("kind")
    if kind is None:
        if "d" not in p or "t" not in p:
            raise CLIError(EXIT_VALIDATION, "missing", "give --kind with its parameters, or --d and --t")
        st = h2_stratify(_real(p["d"]), _real(p["t"]), q)
        if isinstance(st, str):
            raise CLIError(EXIT_VALIDATION, "not_admissible", "(d, t) is off the S_plus grid")
        return st, q
    kind = kind if kind.startswith("S_") else f"S_{kind}"
    need = {"S_plus": ("c", "n"), "S_zero": ("t",), "S_minus": ("c", "a")}[kind]
    missing = [k for k in need if k not in p]
    if missing:
        raise CLIError(EXIT_VALIDATION, "missing", f"{kind} needs {missing}")
    if kind == "S_plus":
        return stratum_plus(_real(p["c"]), int(p["n"]), q), q
    if kind == "S_zero":
        return stratum_zero(_real(p["t"])), q
    c, a = _real(p["c"]), _real(p["a"])
    if c <= 0 or a <= 0:
        raise CLIError(EXIT_VALIDATION, "range", "S_minus needs c > 0 and a > 0")
    return stratum_minus(c, a), q


def cmd_h2(p: dict) -> dict:
    import numpy as np
    from .lowrank_models import (fusion_check, h2_model, h2_stratify, invariance_residual, relation_residuals,
                                 stratum_state)
    act = p["action"]
    if act == "stratify":
        if "d" not in p or "t" not in p:
            raise CLIError(EXIT_VALIDATION, "missing", "stratify needs --d and --t")
        st = h2_stratify(_real(p["d"]), _real(p["t"]), _q(p))
        return {"admissible": not isinstance(st, str), "stratum": None if isinstance(st, str) else st.to_json()}
    st, q = _stratum(p)
    N = int(p.get("N", 40))
    which = p.get("which")
    if act == "model":
        ops = h2_model(st, which, N, q)
        z = np.diag(ops["z"].matrix)
        return {"stratum": st.to_json(), "block": which, "dim": len(z),
                "z_spectrum": [_fmt(x) for x in z],
                "residuals": {k: _fmt(v) for k, v in relation_residuals(ops, st, q).items()}}
    if act == "state":
        word = list(p.get("word", "z"))
        return {"stratum": st.to_json(), "word": "".join(word), "N": N,
                "value": _fmt(stratum_state(st, word, N, q))}
    if act == "residual":
        r = invariance_residual(st, N, q, degree=int(p.get("degree", 3)))
        return {"stratum": st.to_json(), "N": N, "residual": {k: _fmt(v) for k, v in r.items()}}
    blocks = [which] if which else (["+", "-"] if st.kind == "S_minus" else [None])
    return {"stratum": st.to_json(), "fusion": {b or "all": {k: (v if isinstance(v, int) else _fmt(v))
                                                         for k, v in fusion_check(st, b, N, N, q).items()}
                                                for b in blocks}}


def _lambda(x):
    from .lowrank_models import QVal
    if isinstance(x, dict):
        return QVal(_frac(x["coef"]), _frac(x.get("qexp", 0)))
    if isinstance(x, int):
        return QVal(Fraction(x))
    s = str(x).replace(" ", "")
    if "q" not in s:
        return QVal(_frac(s))
    coef, _, rest = s.partition("q^")
    coef = coef.rstrip("*") or "1"
    return QVal(_frac(coef), _frac(rest.strip("{}")))


def cmd_verma(p: dict) -> dict:
    from .lowrank_models import classify_hw, verma_gram
    q = _q(p)
    eps = _frac(p["eps"])
    if p.get("classify"):
        return classify_hw(p["case"], eps, q, int(p.get("nmax", 20))).to_json()
    if "lambda" not in p:
        raise CLIError(EXIT_VALIDATION, "missing", "verma needs --lambda (or --classify)")
    lam = _lambda(p["lambda"])
    if float(lam.K) <= 0:
        raise CLIError(EXIT_VALIDATION, "range", "lambda must be positive")
    return verma_gram(p["case"], lam, eps, int(p.get("tmax", 50)), q).to_json()


def cmd_check(p: dict) -> dict:
    from .suites import CRITERIA, SUITES, run_suite
    name = p["suite"]
    names = [CRITERIA[k] for k in sorted(CRITERIA)] if name == "all" else [name]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise CLIError(EXIT_VALIDATION, "unknown_suite", f"unknown suite {unknown[0]!r}",
                       known=sorted(SUITES) + ["all"])
    kw = {}
    if "max_rank" in p:
        kw["max_rank"] = int(p["max_rank"])
    if "samples" in p:
        kw["samples"] = int(p["samples"])
    results = [run_suite(n, **kw).to_json() for n in names]
    return {"ok": all(r["ok"] for r in results), "suites": results}


COMMANDS = {"rootsys": cmd_rootsys, "fold": cmd_fold, "twist": cmd_twist, "twine": cmd_twine, "hc": cmd_hc,
            "integral": cmd_integral, "state": cmd_state, "h2": cmd_h2, "verma": cmd_verma, "check": cmd_check}


# ---------------------------------------------------------------- argument parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qorbit", description="Combinatorial and spectral data of q-deformed twisted orbit spaces.")
    ap.add_argument("--out", help="write the JSON document to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, system=True, datum=False):
        sp.add_argument("--json", dest="inline", help="inline JSON object of parameters")
        sp.add_argument("--out", dest="out_sub", help=argparse.SUPPRESS)
        if system:
            sp.add_argument("--type", help="Cartan type label, e.g. A3, B2, A1xA1")
            sp.add_argument("--cartan", type=json.loads, help="explicit Cartan matrix as JSON")
        if datum:
            sp.add_argument("--tau", type=_ints, help="involution as 1-based images, e.g. 3,2,1")
            sp.add_argument("--eps", type=_rats, help="real eps values, e.g. -1,1 (complex values via --json)")
            sp.add_argument("--datum", help="path of a JSON twisting datum")

    sp = sub.add_parser("rootsys", help="root system summary")
    common(sp)
    sp.add_argument("--guard", type=int)
    sp = sub.add_parser("fold", help="fold a root system along a diagram involution")
    common(sp)
    sp.add_argument("--tau", type=_ints)
    sp = sub.add_parser("twist", help="twisting-datum data")
    sp.add_argument("action", choices=["classify", "compact", "wminus", "reduce"])
    common(sp, datum=True)
    sp = sub.add_parser("twine", help="twining multiplicities")
    common(sp)
    sp.add_argument("--tau", type=_ints)
    sp.add_argument("--weight", type=_ints)
    sp.add_argument("--classical", action="store_true", default=None, help="use the explicit trace instead")
    sp = sub.add_parser("hc", help="Harish-Chandra image of the central element z_varpi")
    common(sp, datum=True)
    sp.add_argument("--weight", type=_ints)
    sp.add_argument("--grouped", action="store_true", default=None)
    sp.add_argument("--lambda", dest="lambda_", type=_rats, help="weight function values per node")
    sp.add_argument("--q")
    sp = sub.add_parser("integral", help="invariant integral of a spherical coefficient")
    common(sp, datum=True)
    sp.add_argument("--gamma", type=_rats)
    sp.add_argument("--weight", type=_ints)
    sp.add_argument("--q")
    sp = sub.add_parser("state", help="cell decomposition of the invariant state (rank <= 2 cases)")
    common(sp, system=False)
    sp.add_argument("--case")
    sp.add_argument("--eps")
    sp.add_argument("--gamma", type=_rats)
    sp.add_argument("--depth", type=int)
    sp.add_argument("--q")
    sp.add_argument("--n", type=int, help="also report the limit identity at omega = (n-1) rho")
    sp.add_argument("--weight", type=_ints)
    sp = sub.add_parser("h2", help="rank-one operator models")
    sp.add_argument("action", choices=["stratify", "model", "state", "residual", "fusion"])
    common(sp, system=False)
    for k in ("d", "t", "q", "kind", "c", "a", "which", "word"):
        sp.add_argument(f"--{k}")
    sp.add_argument("--n", type=int)
    sp.add_argument("--N", type=int)
    sp.add_argument("--degree", type=int)
    sp = sub.add_parser("verma", help="Verma-module Gram recursion")
    common(sp, system=False)
    sp.add_argument("--case")
    sp.add_argument("--lambda", dest="lambda_")
    sp.add_argument("--eps")
    sp.add_argument("--tmax", type=int)
    sp.add_argument("--q")
    sp.add_argument("--classify", action="store_true", default=None)
    sp.add_argument("--nmax", type=int)
    sp = sub.add_parser("check", help="run a named verification suite")
    sp.add_argument("suite")
    common(sp, system=False)
    sp.add_argument("--max-rank", dest="max_rank", type=int)
    sp.add_argument("--samples", type=int)
    return ap


_NEG = re.compile(r"^-[\d.]")


def _glue_negative_values(argv: List[str]) -> List[str]:
    """Turn `--eps -1,1` into `--eps=-1,1` so argparse does not read the value as an option."""
    out: List[str] = []
    for a in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEG.match(a):
            out[-1] = f"{out[-1]}={a}"
        else:
            out.append(a)
    return out


def params_from_args(ns: argparse.Namespace) -> dict:
    skip = {"command", "inline", "out", "out_sub"}
    p = {}
    for k, v in vars(ns).items():
        if k in skip or v is None:
            continue
        p["lambda" if k == "lambda_" else k] = v
    if ns.command == "h2" and "lambda" in p:
        p.pop("lambda")
    if getattr(ns, "inline", None):
        try:
            extra = json.loads(ns.inline)
        except json.JSONDecodeError as e:
            raise CLIError(EXIT_VALIDATION, "json", f"--json is not valid JSON: {e}")
        if not isinstance(extra, dict):
            raise CLIError(EXIT_VALIDATION, "json", "--json must be an object")
        dup = sorted(set(extra) & set(p))
        if dup:
            raise CLIError(EXIT_VALIDATION, "conflict", f"keys given twice: {dup}")
        p.update(extra)
    return p


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> Tuple[int, dict]:
    """Parse, validate and dispatch; returns (exit code, JSON document)."""
    code, doc, _ = _run(argv)
    return code, doc


def _run(argv: Optional[Sequence[str]]) -> Tuple[int, dict, Optional[str]]:
    from .rootsys import GuardError
    out_path = None
    try:
        ns = build_parser().parse_args(_glue_negative_values(list(sys.argv[1:] if argv is None else argv)))
        out_path = ns.out or getattr(ns, "out_sub", None)
        params = params_from_args(ns)
        validate(ns.command, params)
        doc = COMMANDS[ns.command](params)
        code = EXIT_OK
        if ns.command == "check" and not doc["ok"]:
            code = EXIT_INVARIANT
            failing = [f"{r['suite']}: {f}" for r in doc["suites"] for f in r["failures"]]
            doc["error"] = {"kind": "invariant", "message": "suite assertions failed", "assertion": failing[:1]}
    except CLIError as e:
        code, doc = e.code, e.to_json()
    except GuardError as e:
        code, doc = EXIT_GUARD, {"error": {"kind": "guard", "message": str(e)}}
    except (ValueError, KeyError, ZeroDivisionError, FileNotFoundError, json.JSONDecodeError) as e:
        code, doc = EXIT_VALIDATION, {"error": {"kind": "validation", "message": str(e) or type(e).__name__}}
    except (AssertionError, ArithmeticError, RuntimeError) as e:
        tb = traceback.extract_tb(e.__traceback__)[-1]
        ident = f"{os.path.basename(tb.filename)}:{tb.lineno}:{tb.name}"
        code, doc = EXIT_INVARIANT, {"error": {"kind": "invariant", "message": str(e), "assertion": ident}}
    return code, doc, out_path


def main(argv: Optional[Sequence[str]] = None) -> int:
    _cap_threads()
    code, doc, out_path = _run(argv)
    text = dumps(doc)
    if out_path and code == EXIT_OK:
        with open(out_path, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
