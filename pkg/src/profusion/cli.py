"""Batch front-end: group/tower specs in, machine-readable reports out.

Spec files are JSON.  A group spec is either a catalog reference
(``{"builtin": "S4"}``) or explicit generators
(``{"name", "degree", "prime", "generators": [cycle lists]}``).  A tower
spec wraps a group spec with ``normals`` (a descending chain, each a
list of generator cycle lists, ending at the trivial subgroup) and
optionally ``subsystems`` (ambient-subgroup generator lists, coarsest
first) for the staged decomposition.

Morphisms are selected the way the worked examples name them: by the
domain's generators plus a conjugating element (``--P``, ``--g``), or by
an index into the canonical hom-set order (``--P``, ``--Pp``,
``--index``).  Cycle syntax on the command line: ``(0 1 2)(3 4)``.

Reports are deterministic: no timestamps, sorted keys, the seed and caps
echoed in the header.  Exit codes: 0 success, 1 malformed spec, 2
mathematical-integrity failure, 3 cap violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from ._util import CapExceeded, IntegrityError
from .alperin import (
    alp_length,
    alperin_decompose,
    chain_report,
    essential_subgroups,
    product_growth_report,
    product_length_laws,
    product_radical_split,
    refine_to_essential,
)
from .catalog import BUILDERS
from .fusion import (
    BadFunctor,
    FusionMorphism,
    NoExtension,
    realize,
    realize_product,
)
from .group import (
    FiniteGroup,
    Permutation,
    Subgroup,
    centralizer,
    group_from_generators,
    subgroup_generated,
    sylow_p,
)
from .saturation import is_saturated, iso_classes
from .tower import (
    NoFactoring,
    StageFailure,
    convergent_alperin,
    limitlength_check,
    osc_quotient_tower,
    saturation_at_depth,
    subsystem_sequence,
    sylow_limit_check,
    tower_from_group,
)

__all__ = [
    "RunConfig",
    "SpecError",
    "cmd_group_info",
    "cmd_fusion",
    "cmd_saturation",
    "cmd_essentials",
    "cmd_decompose",
    "cmd_length",
    "cmd_product",
    "cmd_tower",
    "main",
]


class SpecError(ValueError):
    """A spec file is malformed; the message carries field diagnostics."""


@dataclass(frozen=True)
class RunConfig:
    order_cap: int = 50_000
    subgroup_cap: int = 20_000
    depth_cap: int = 3
    k_sweep_budget: int = 200
    fmt: str = "json"
    seed: int = 0

    def __post_init__(self):
        for f in ("order_cap", "subgroup_cap", "depth_cap", "k_sweep_budget"):
            if getattr(self, f) <= 0:
                raise SpecError(f"config field {f} must be positive")
        if self.fmt not in ("json", "tsv"):
            raise SpecError(f"unknown output format {self.fmt!r}")


def _py(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, bytes):
        return x.hex()
    raise TypeError(f"not JSON-serializable: {type(x)}")


def _dump(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=_py) + "\n"


def _tsv(report: dict) -> str:
    rows = report.get("rows")
    lines = []
    if rows:
        cols = sorted({k for r in rows for k in r})
        lines.append("\t".join(cols))
        for r in rows:
            lines.append("\t".join(str(r.get(c, "")) for c in cols))
    else:
        for k in sorted(report):
            if k != "header":
                lines.append(f"{k}\t{json.dumps(report[k], sort_keys=True, default=_py)}")
    return "\n".join(lines) + "\n"


# -- spec ingestion -----------------------------------------------------------------


def load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as e:
        raise SpecError(f"cannot read spec {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SpecError(f"spec {path} is not valid JSON (line {e.lineno}, col {e.colno})") from e
    if not isinstance(spec, dict):
        raise SpecError(f"spec {path}: top level must be an object")
    return spec


def _perm_from_cycles(cycles, degree: int, where: str) -> Permutation:
    if not isinstance(cycles, list):
        raise SpecError(f"{where}: generator must be a list of cycles")
    try:
        return Permutation.from_cycles(cycles, degree)
    except (ValueError, TypeError, IndexError) as e:
        raise SpecError(f"{where}: bad cycle data ({e})") from e


def group_from_spec(spec: dict, prime: int | None = None) -> tuple[FiniteGroup, int]:
    """Build (G, p) from a group spec dict."""
    if "builtin" in spec:
        name = spec["builtin"]
        if name not in BUILDERS:
            raise SpecError(
                f"field 'builtin': unknown group {name!r}; have {sorted(BUILDERS)}"
            )
        G, p = BUILDERS[name]()
        return G, int(prime or spec.get("prime", p))
    for f in ("degree", "generators"):
        if f not in spec:
            raise SpecError(f"group spec missing field {f!r}")
    degree = spec["degree"]
    if not isinstance(degree, int) or degree <= 0:
        raise SpecError("field 'degree': must be a positive integer")
    gens = [
        _perm_from_cycles(c, degree, f"field 'generators[{i}]'")
        for i, c in enumerate(spec["generators"])
    ]
    if not gens:
        raise SpecError("field 'generators': need at least one generator")
    G = group_from_generators(gens, name=spec.get("name", "G"))
    p = prime or spec.get("prime")
    if not isinstance(p, int) or p < 2:
        raise SpecError("field 'prime': must be an integer >= 2 (or pass --prime)")
    return G, p


def _subgroup_from_gens(G: FiniteGroup, gen_cycles, where: str) -> Subgroup:
    if gen_cycles in ([], [[]]):
        return Subgroup(G, np.array([0], dtype=np.int32))
    idx = []
    for i, c in enumerate(gen_cycles):
        p = _perm_from_cycles(c, G.degree, f"{where}[{i}]")
        try:
            idx.append(G.index_of_perm(p))
        except (KeyError, ValueError) as e:
            raise SpecError(f"{where}[{i}]: permutation is not in the group") from e
    return subgroup_generated(G, idx)


def _parse_cli_perm(text: str, degree: int, where: str) -> Permutation:
    text = text.strip()
    if not text or text == "()":
        return Permutation(list(range(degree)))
    if not (text.startswith("(") and text.endswith(")")):
        raise SpecError(f"{where}: expected cycle syntax like '(0 1 2)(3 4)'")
    cycles = []
    for part in text[1:-1].split(")("):
        try:
            cyc = [int(t) for t in part.replace(",", " ").split()]
        except ValueError as e:
            raise SpecError(f"{where}: non-integer in cycle {part!r}") from e
        if cyc:
            cycles.append(cyc)
    return _perm_from_cycles(cycles, degree, where)


# -- morphism selection -------------------------------------------------------------


def _select_morphism(F, args) -> FusionMorphism:
    if not getattr(args, "P", None):
        raise SpecError("morphism selection needs --P (domain generators)")
    def _element(text: str, where: str) -> int:
        p = _parse_cli_perm(text, F.G.degree, where)
        try:
            return F.G.index_of_perm(p)
        except KeyError as e:
            raise SpecError(f"{where}: permutation is not in the group") from e

    g_idx = [_element(t, "--P") for t in args.P.split(";")]
    try:
        P = Subgroup(F.S, F.to_s(subgroup_generated(F.G, g_idx).members))
    except (ValueError, KeyError) as e:
        raise SpecError("--P: generators do not lie in the Sylow subgroup") from e
    if getattr(args, "g", None):
        g = _element(args.g, "--g")
        moved = F.G.conj_many(g, F.to_g(P.members))
        try:
            mapping = F.to_s(moved)
        except ValueError as e:
            raise IntegrityError("--g does not conjugate P into S") from e
        img = Subgroup(F.S, np.sort(mapping))
        return FusionMorphism(P, img, mapping)
    if getattr(args, "Pp", None):
        q_idx = [_element(t, "--Pp") for t in args.Pp.split(";")]
        try:
            Q = Subgroup(F.S, F.to_s(subgroup_generated(F.G, q_idx).members))
        except (ValueError, KeyError) as e:
            raise SpecError("--Pp: generators do not lie in the Sylow subgroup") from e
        hs = F.hom_set(P, Q)
    else:
        hs = F.maps_from(P)
    k = getattr(args, "index", None)
    if k is None:
        raise SpecError("morphism selection needs --g or --index")
    if not 0 <= k < len(hs):
        raise SpecError(f"--index {k} out of range (hom set has {len(hs)} maps)")
    return hs[k]


# -- commands -----------------------------------------------------------------------


def _header(cmd: str, spec, cfg: RunConfig) -> dict:
    blob = json.dumps(spec, sort_keys=True).encode()
    return {
        "command": cmd,
        "spec_sha256": hashlib.sha256(blob).hexdigest()[:16],
        "config": asdict(cfg),
    }


def cmd_group_info(spec: dict, cfg: RunConfig) -> dict:
    G, p = group_from_spec(spec)
    if G.order > cfg.order_cap:
        raise CapExceeded(f"group order {G.order} above cap {cfg.order_cap}")
    S = sylow_p(G, p)
    Z = centralizer(G, G.whole())
    return {
        "header": _header("group-info", spec, cfg),
        "name": G.name,
        "order": int(G.order),
        "degree": int(G.degree),
        "prime": p,
        "sylow_order": int(S.order),
        "center_order": int(Z.order),
    }


def _realized(spec: dict, cfg: RunConfig):
    G, p = group_from_spec(spec)
    if G.order > cfg.order_cap:
        raise CapExceeded(f"group order {G.order} above cap {cfg.order_cap}")
    return realize(G, p)


def cmd_fusion(spec: dict, cfg: RunConfig) -> dict:
    F = _realized(spec, cfg)
    lattice = F.subgroups()
    if len(lattice) > cfg.subgroup_cap:
        raise CapExceeded(f"{len(lattice)} subgroups above cap {cfg.subgroup_cap}")
    classes = iso_classes(F)
    total = sum(len(F.maps_from(P)) for P in lattice)
    rows = [
        {
            "class_order": int(cls[0].order),
            "class_size": len(cls),
            "maps_from_rep": len(F.maps_from(cls[0])),
        }
        for cls in classes
    ]
    return {
        "header": _header("fusion", spec, cfg),
        "sylow_order": int(F.S.order),
        "subgroups": len(lattice),
        "iso_classes": len(classes),
        "morphisms": int(total),
        "rows": rows,
    }


def cmd_saturation(spec: dict, cfg: RunConfig) -> dict:
    F = _realized(spec, cfg)
    ok, rep = is_saturated(F, report=True)
    return {
        "header": _header("saturation", spec, cfg),
        "saturated": bool(ok),
        "classes": len(rep),
        "rows": rep,
    }


def cmd_essentials(spec: dict, cfg: RunConfig) -> dict:
    F = _realized(spec, cfg)
    ess = essential_subgroups(F)
    rows = [{"order": int(E.order), "key": E.key} for E in ess]
    return {
        "header": _header("essentials", spec, cfg),
        "count": len(ess),
        "rows": rows,
    }


def cmd_decompose(spec: dict, cfg: RunConfig, args) -> dict:
    F = _realized(spec, cfg)
    phi = _select_morphism(F, args)
    raw = alperin_decompose(F, phi)
    refined = refine_to_essential(F, raw)
    return {
        "header": _header("decompose", spec, cfg),
        "chain": chain_report(F, refined),
    }


def cmd_length(spec: dict, cfg: RunConfig, args) -> dict:
    F = _realized(spec, cfg)
    phi = _select_morphism(F, args)
    n = alp_length(F, phi, args.variant)
    return {
        "header": _header("length", spec, cfg),
        "variant": args.variant,
        "length": int(n),
    }


def cmd_product(specs: list[dict], cfg: RunConfig, args) -> dict:
    factors = [_realized(s, cfg) for s in specs]
    order = 1
    for F in factors:
        order *= F.G.order
    out = {"header": _header("product", specs, cfg), "factor_orders": [int(F.G.order) for F in factors]}
    if order <= cfg.order_cap:
        FP = realize_product(factors)
        ess = essential_subgroups(FP)
        split_ok = all(
            product_radical_split(FP, factors, E)["essential_law_ok"] for E in ess
        )
        out["essential_split_law"] = bool(split_ok)
        out["essentials"] = len(ess)
        if getattr(args, "P", None):
            phis = [_select_morphism(F, args) for F in factors]
            out["length_laws"] = product_length_laws(FP, factors, phis)
    else:
        out["realized"] = False
    if getattr(args, "P", None):
        phi0 = _select_morphism(factors[0], args)
        growth = product_growth_report(factors[0], phi0, depth=cfg.depth_cap)
        out["growth"] = growth
        out["rows"] = growth["rows"]
    return out


def cmd_tower(spec: dict, cfg: RunConfig, args) -> dict:
    if "group" not in spec or "normals" not in spec:
        raise SpecError("tower spec needs 'group' and 'normals' fields")
    G, p = group_from_spec(spec["group"])
    if G.order > cfg.order_cap:
        raise CapExceeded(f"group order {G.order} above cap {cfg.order_cap}")
    normals = [
        _subgroup_from_gens(G, gs, f"field 'normals[{i}]'")
        for i, gs in enumerate(spec["normals"])
    ]
    if len(normals) > cfg.depth_cap:
        raise CapExceeded(f"tower depth {len(normals)} above cap {cfg.depth_cap}")
    tower = tower_from_group(G, p, normals)
    out = {
        "header": _header("tower", spec, cfg),
        "structure": tower.report(),
        "sylow_limit_ok": bool(sylow_limit_check(tower)),
    }
    if tower.limit.S.order <= 64:
        out["saturation"] = saturation_at_depth(tower)
        out["quotients"] = osc_quotient_tower(
            tower, sample_pairs=cfg.k_sweep_budget, seed=cfg.seed
        )
    if "subsystems" in spec:
        ambients = [
            _subgroup_from_gens(G, gs, f"field 'subsystems[{i}]'")
            for i, gs in enumerate(spec["subsystems"])
        ]
        seq = subsystem_sequence(tower, ambients)
        out["subsystems"] = seq.reports
        if getattr(args, "P", None):
            phi = _select_morphism(tower.limit, args)
            out["staged_chain"] = convergent_alperin(tower, seq, phi)
            if tower.limit.S.order <= 64:
                out["limitlength"] = limitlength_check(tower, phi)
    return out


# -- driver -------------------------------------------------------------------------


def _cache_path(cmd: str, spec, cfg: RunConfig) -> str | None:
    root = os.environ.get("PROFUSION_CACHE_DIR")
    if not root:
        return None
    blob = json.dumps([cmd, spec, asdict(cfg)], sort_keys=True).encode()
    return os.path.join(root, hashlib.sha256(blob).hexdigest() + ".json")


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="profusion", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=[
        "group-info", "fusion", "saturation", "essentials",
        "decompose", "length", "product", "tower",
    ])
    ap.add_argument("--spec", action="append", required=True,
                    help="spec file (repeat for product factors)")
    ap.add_argument("--prime", type=int, default=None)
    ap.add_argument("--variant", choices=["open", "closed", "essential"], default="open")
    ap.add_argument("--depth", type=int, default=None, help="tower/growth depth cap")
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=["json", "tsv"], default="json")
    ap.add_argument("--caps", default=None,
                    help="ORDER,SUBGROUPS e.g. 50000,20000")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--P", default=None, help="domain generators, ';'-separated cycles")
    ap.add_argument("--Pp", default=None, help="codomain generators for --index mode")
    ap.add_argument("--g", default=None, help="conjugating element (cycles)")
    ap.add_argument("--index", type=int, default=None,
                    help="index into the canonical hom-set order")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        caps = (50_000, 20_000)
        if args.caps:
            parts = args.caps.split(",")
            if len(parts) != 2:
                raise SpecError("--caps wants ORDER,SUBGROUPS")
            caps = (int(parts[0]), int(parts[1]))
        cfg = RunConfig(
            order_cap=caps[0],
            subgroup_cap=caps[1],
            depth_cap=args.depth or 3,
            fmt=args.format,
            seed=args.seed,
        )
        specs = [load_spec(p) for p in args.spec]
        if args.prime:
            for s in specs:
                s.setdefault("prime", args.prime)
                s["prime"] = args.prime

        key_spec = specs if args.command == "product" else specs[0]
        cpath = _cache_path(args.command, [key_spec, vars(args).get("variant"),
                                           args.P, args.Pp, args.g, args.index], cfg)
        if cpath and os.path.exists(cpath):
            with open(cpath) as fh:
                text = fh.read()
            _emit(text if cfg.fmt == "json" else _tsv(json.loads(text)), args.out)
            return 0

        if args.command == "group-info":
            report = cmd_group_info(specs[0], cfg)
        elif args.command == "fusion":
            report = cmd_fusion(specs[0], cfg)
        elif args.command == "saturation":
            report = cmd_saturation(specs[0], cfg)
        elif args.command == "essentials":
            report = cmd_essentials(specs[0], cfg)
        elif args.command == "decompose":
            report = cmd_decompose(specs[0], cfg, args)
        elif args.command == "length":
            report = cmd_length(specs[0], cfg, args)
        elif args.command == "product":
            if len(specs) < 2:
                raise SpecError("product wants at least two --spec files")
            report = cmd_product(specs, cfg, args)
        else:
            report = cmd_tower(specs[0], cfg, args)

        text = _dump(report)
        if cpath:
            os.makedirs(os.path.dirname(cpath), exist_ok=True)
            with open(cpath, "w") as fh:
                fh.write(text)
        _emit(text if cfg.fmt == "json" else _tsv(report), args.out)
        return 0
    except SpecError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 1
    except CapExceeded as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return 3
    except (IntegrityError, BadFunctor, NoExtension, NoFactoring, StageFailure) as e:
        print(f"integrity failure: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
