"""Command-line front end: JSON datum files in, deterministic reports out.

Exit codes: 0 on success (a negative verdict is still a success), 1 on a
domain error (the error is serialized into the report), 2 on schema or IO
problems.  Reports are byte-identical across runs for identical inputs:
keys are sorted, rational depths are printed as "num/den" strings, and no
floating point reaches the output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from fractions import Fraction
from importlib import resources

import jsonschema

from . import __version__
from .errors import DomainError
from .localfield import (
    STEP_UNRAMIFIED,
    SYM_ANTI,
    SYM_FIXED,
    SYM_NONE,
    LeadingTerm,
    base_field,
    canonical_tau,
    factor_field,
)
from .finitefield import fq_embedding
from .quadform import QuadInvariants
from .theta import (
    DistinctionWitness,
    distinction_transport,
    distinguished_check,
    e_descriptor,
    lift,
    parity_predict,
)
from .torusdata import (
    Factor,
    TorusDatum,
    block_decompose,
    datum_equivalent,
    validate,
)
from .finitetheta import validate_weyl_form_rank1, verify_finite_theta


class SchemaError(Exception):
    pass


_SCHEMA_CACHE = None


def _schema():
    global _SCHEMA_CACHE
    if _SCHEMA_CACHE is None:
        with resources.files("thetaparam.schemas").joinpath("datum.schema.json").open() as fh:
            _SCHEMA_CACHE = json.load(fh)
    return _SCHEMA_CACHE


def load_document(path: str) -> tuple[dict, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as ex:
        raise SchemaError(f"cannot read {path}: {ex}") from ex
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as ex:
        raise SchemaError(f"{path} is not valid JSON: {ex}") from ex
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as ex:
        raise SchemaError(f"{path} violates the datum schema: {ex.message}") from ex
    return doc, digest


def parse_datum(doc: dict):
    """Build the in-memory datum; with a distinction block the datum lives
    over E and a witness is returned as well."""
    base_f = base_field(doc["base"]["p"], doc["base"]["f"])
    distinction = doc.get("distinction")
    base = e_descriptor(base_f) if distinction else base_f
    structures = (distinction or {}).get("F_structure") or []
    factors = []
    for i, fdoc in enumerate(doc["factors"]):
        field = factor_field(base, fdoc["m"], fdoc["step"])
        k = field.residue_field()
        struct = structures[i] if i < len(structures) else {}
        cdoc = fdoc["c"]
        c_sigma = cdoc.get("sigma_sym") or struct.get("sigma_c") or SYM_NONE
        c = LeadingTerm(field, cdoc["val"], k.element(cdoc["residue_coeffs"]), cdoc["sym"], c_sigma)
        gammas = []
        gsigmas = struct.get("sigma_gamma") or []
        for j, gdoc in enumerate(fdoc.get("gamma") or []):
            r = Fraction(gdoc["r"])
            gs = gdoc.get("sigma_sym") or (gsigmas[j] if j < len(gsigmas) else SYM_NONE)
            g = LeadingTerm(field, -int(r * field.e), k.element(gdoc["residue_coeffs"]), SYM_ANTI, gs)
            gammas.append((r, g))
        factors.append(Factor(fdoc["m"], fdoc["step"], c, fdoc.get("chi0", 0), tuple(gammas)))
    datum = TorusDatum(base, tuple(factors), doc["polarity"])
    witness = DistinctionWitness(base_f, datum) if distinction else None
    return datum, witness


def datum_to_json(datum: TorusDatum, base_is_e: bool = False) -> dict:
    base_f = datum.base.base_f // 2 if base_is_e else datum.base.base_f
    out = {
        "base": {"p": datum.base.base_p, "f": base_f},
        "polarity": datum.polarity,
        "factors": [],
    }
    for f in datum.factors:
        fdoc = {
            "m": f.m,
            "step": f.step,
            "c": _lt_to_json(f.c),
            "chi0": f.chi0,
        }
        if f.gamma_levels:
            fdoc["gamma"] = [
                {
                    "r": _frac_str(r),
                    "residue_coeffs": list(g.residue.coeffs),
                    **({"sigma_sym": g.sigma_sym} if g.sigma_sym != SYM_NONE else {}),
                }
                for r, g in f.gamma_levels
            ]
        out["factors"].append(fdoc)
    if base_is_e:
        out["distinction"] = {"E": "unramified"}
    return out


def _lt_to_json(lt: LeadingTerm) -> dict:
    doc = {"val": lt.val, "residue_coeffs": list(lt.residue.coeffs), "sym": lt.sym}
    if lt.sigma_sym != SYM_NONE:
        doc["sigma_sym"] = lt.sigma_sym
    return doc


def _frac_str(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def _inv_json(inv: QuadInvariants) -> dict:
    return inv.as_dict()


def seeded_choices(datum: TorusDatum, seed: int):
    """Deterministic alternative (tau, uniformizer) choices from a seed:
    tau is scaled by a random unit of L0, the uniformizer by a random unit
    of the base field."""
    rng = random.Random(seed)
    k_base = datum.base.residue_field()
    while True:
        w = k_base.element([rng.randrange(datum.base.base_p) for _ in range(k_base.f)])
        if not w.is_zero():
            break
    uniformizer = LeadingTerm(datum.base, 1, w, SYM_FIXED, SYM_NONE)
    taus = {}
    for i, f in enumerate(datum.factors):
        if f.gamma_levels or f.step != STEP_UNRAMIFIED:
            continue
        field = f.c.field
        k0 = field.subfield_residue()
        while True:
            x = k0.element([rng.randrange(field.base_p) for _ in range(k0.f)])
            if not x.is_zero():
                break
        emb = fq_embedding(k0, field.residue_field())
        tau = canonical_tau(field)
        taus[i] = LeadingTerm(field, 0, tau.residue * emb.apply(x), SYM_ANTI, tau.sigma_sym)
    return uniformizer, taus


# ---------------------------------------------------------------------------
# commands


def _report(operation: str, digest: str | None, payload: dict) -> dict:
    rep = {"tool": "thetaparam", "version": __version__, "operation": operation}
    if digest is not None:
        rep["input_sha256"] = digest
    rep.update(payload)
    return rep


def cmd_validate(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    datum, witness = parse_datum(doc)
    report = validate(datum)
    payload = {"result": report.as_dict()}
    return _report("validate", digest, payload), 0 if report.ok else 1


def cmd_lift(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    datum, _ = parse_datum(doc)
    if args.tau_seed is not None:
        uniformizer, taus = seeded_choices(datum, args.tau_seed)
    else:
        uniformizer, taus = None, None
    res = lift(datum, uniformizer, taus)
    payload = {
        "result": {
            "lifted": datum_to_json(res.lifted),
            "invariants": _inv_json(res.target_invariants),
            "predicted_invariants": _inv_json(res.predicted_invariants),
            "so_type": res.so.as_dict(),
        },
        "choices": res.choices,
    }
    return _report("lift", digest, payload), 0


def cmd_predict(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    datum, _ = parse_datum(doc)
    inv, so = parity_predict(datum)
    payload = {"result": {"invariants": _inv_json(inv), "so_type": so.as_dict()}}
    return _report("predict", digest, payload), 0


def cmd_equiv(args) -> tuple[dict, int]:
    doc_a, dig_a = load_document(args.path_a)
    doc_b, dig_b = load_document(args.path_b)
    a, _ = parse_datum(doc_a)
    b, _ = parse_datum(doc_b)
    verdict = datum_equivalent(a, b, mode=args.mode)
    payload = {"input_sha256_b": dig_b, "result": {"equivalent": verdict, "mode": args.mode}}
    return _report("equiv", dig_a, payload), 0


def cmd_blocks(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    datum, _ = parse_datum(doc)
    decomposition = block_decompose(datum)
    payload = {"result": {"levels": decomposition.as_dict()}}
    return _report("blocks", digest, payload), 0


def cmd_distinguish(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    _, witness = parse_datum(doc)
    if witness is None:
        raise DomainError("the input file carries no distinction block")
    verdict = distinguished_check(witness)
    payload = {"result": verdict.as_dict()}
    return _report("distinguish", digest, payload), 0


def cmd_transport(args) -> tuple[dict, int]:
    doc, digest = load_document(args.path)
    _, witness = parse_datum(doc)
    if witness is None:
        raise DomainError("the input file carries no distinction block")
    res = distinction_transport(witness)
    payload = {
        "result": {
            "twisted_datum_over_E": datum_to_json(res.twisted_datum_e, base_is_e=True),
            "invariants_over_E": _inv_json(res.invariants_e),
            "f_structure": datum_to_json(res.f_datum),
            "invariants_over_F": _inv_json(res.invariants_f),
            "so_type_over_F": res.so_f.as_dict(),
            "checks": res.checks,
        },
        "choices": res.choices,
    }
    return _report("transport", digest, payload), 0


def cmd_finite_verify(args) -> tuple[dict, int]:
    out = {"theta": verify_finite_theta(args.q), "weyl": validate_weyl_form_rank1(args.q)}
    return _report("finite-verify", None, {"result": out}), 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thetaparam",
        description="parameter-level theta correspondence for torus data over p-adic fields",
    )
    parser.add_argument("--out", help="write the report to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural validation of a datum file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lift", help="theta lift of a symplectic datum")
    p.add_argument("path")
    p.add_argument("--tau-seed", type=int, default=None,
                   help="derive alternative (tau, uniformizer) choices from this seed")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("predict", help="parity prediction for a depth-zero datum")
    p.add_argument("path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("equiv", help="equivalence of two datum files")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--mode", choices=["weyl", "strict"], default="weyl")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("blocks", help="block decomposition by depth")
    p.add_argument("path")
    p.set_defaults(func=cmd_blocks)

    p = sub.add_parser("distinguish", help="distinction verdict for a witness file")
    p.add_argument("path")
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("transport", help="distinction transport of a distinguished witness")
    p.add_argument("path")
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("finite-verify", help="finite-field theta oracle report")
    p.add_argument("--q", type=int, choices=[3, 5], required=True)
    p.set_defaults(func=cmd_finite_verify)

    return parser


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except SchemaError as ex:
        _emit({"tool": "thetaparam", "version": __version__, "error": str(ex),
               "kind": "schema"}, args.out)
        return 2
    except DomainError as ex:
        _emit({"tool": "thetaparam", "version": __version__, "error": str(ex),
               "kind": type(ex).__name__}, args.out)
        return 1
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
