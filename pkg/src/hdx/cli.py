"""Command-line entry point: build a complex, run analysis stages, write JSON reports.

Every report embeds the configuration, its hash and the package version and
contains no timestamps, so equal configurations give byte-identical files.
Exit codes: 0 success, 2 configuration error, 3 budget exceeded (partial
reports are written), 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .algebra import Field
from .complex import SimplicialComplex, build_coset_complex, check_strong_symmetry
from .constructions import GroupFamily, unip_fq, unip_poly, xsq
from .errors import (
    ConfigError,
    GroupTooLarge,
    HdxError,
    HypothesisUnmet,
    InvariantViolation,
    SearchSpaceTooLarge,
    TooManyVertices,
)
from .groups import DEFAULT_SIZE_CAP, bounded_generation_diameter

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INVARIANT = 0, 2, 3, 4
STAGES = ("build", "symmetry", "homology", "cones", "expansion", "spectral", "presentation", "checklist")
COMMANDS = STAGES + ("all", "xsq")
CONSTRUCTIONS = ("unip_fq", "unip_poly", "xsq", "file")
BUDGET_ERRORS = (GroupTooLarge, SearchSpaceTooLarge, TooManyVertices)


@dataclass
class ExperimentConfig:
    command: str
    construction: str = "unip_fq"
    n: int = 3
    q: int = 2
    s: int = 5
    file: str | None = None
    k: int = 0
    budget_log2: float = 20.0
    size_cap: int = DEFAULT_SIZE_CAP
    time_limit: float = 120.0
    epsilon_prime: str = "1/10"
    lam: float = 0.5
    dehn_samples: int = 50
    seed: int = 0
    threads: int = 1
    out: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f"unknown construction {self.construction!r}")
        if self.construction == "file":
            if not self.file or not Path(self.file).is_file():
                raise ConfigError("--construction file needs an existing --file")
        else:
            try:
                Field.of(self.q)
            except (ValueError, HdxError) as exc:
                raise ConfigError(f"q = {self.q} is not a supported prime power") from exc
        if self.construction in ("unip_fq", "unip_poly") and self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.construction == "xsq" and self.s <= 4:
            raise ConfigError("xsq needs s > 4")
        if self.k < 0:
            raise ConfigError("k must be non-negative")
        if self.budget_log2 <= 0 or self.size_cap <= 0 or self.threads < 1 or self.dehn_samples < 1:
            raise ConfigError("budgets, caps, thread and sample counts must be positive")
        try:
            eps = Fraction(self.epsilon_prime)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad --epsilon-prime {self.epsilon_prime!r}") from exc
        if eps <= 0:
            raise ConfigError("--epsilon-prime must be positive")

    def identity(self) -> dict:
        """The fields that determine results (output location and thread count excluded)."""
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        d.pop("command")
        return d

    def hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Context:
    config: ExperimentConfig
    family: GroupFamily | None = None
    x: SimplicialComplex | None = None
    cache: dict = field(default_factory=dict)


# ---------------------------------------------------------------- stages


def _json_default(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if hasattr(v, "item"):
        return v.item()
    if isinstance(v, (set, frozenset, tuple)):
        return list(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def stage_build(ctx: Context) -> dict:
    cfg = ctx.config
    if cfg.construction == "file":
        ctx.x = SimplicialComplex.from_json(Path(cfg.file).read_text())
        return {"construction": "file", "f_vector": ctx.x.f_vector(), "top_dim": ctx.x.top_dim}
    if cfg.construction == "unip_fq":
        fam = unip_fq(cfg.n, cfg.q, cfg.size_cap)
    elif cfg.construction == "unip_poly":
        fam = unip_poly(cfg.n, cfg.q, cfg.size_cap)
    else:
        fam = xsq(cfg.q, cfg.s, cfg.size_cap)
    ctx.family = fam
    ctx.x = build_coset_complex(fam.group, fam.subgroups)
    return {
        "construction": fam.name,
        "group_order": len(fam.group),
        "subgroup_orders": [len(k) for k in fam.subgroups],
        "f_vector": ctx.x.f_vector(),
        "top_dim": ctx.x.top_dim,
    }


def _need_group(ctx: Context) -> GroupFamily:
    if ctx.family is None:
        raise HypothesisUnmet("this stage needs a coset complex built from a group")
    return ctx.family


def _diameter(ctx: Context) -> int:
    if "diameter" not in ctx.cache:
        fam = _need_group(ctx)
        ctx.cache["diameter"] = bounded_generation_diameter(fam.group, fam.subgroups)
    return ctx.cache["diameter"]


def stage_symmetry(ctx: Context) -> dict:
    fam = _need_group(ctx)
    cert = check_strong_symmetry(fam.group, fam.subgroups, ctx.x)
    d = _diameter(ctx)
    return {"strong_symmetry": cert.to_dict(), "bounded_generation_diameter": d, "N0_prime": d + 1}


def stage_homology(ctx: Context) -> dict:
    from .homology import reduced_betti

    x = ctx.x
    return {"reduced_betti": {str(k): reduced_betti(x, k) for k in range(-1, x.top_dim + 1)}}


def _apexes(ctx: Context) -> list[int]:
    """All vertices of a small complex; one vertex per type for a coset complex (all types are translates)."""
    x = ctx.x
    if x.coset_data is None or x.dim_size(0) <= 64:
        return list(x.vertices)
    return [int(o) for o in x.coset_data.offsets]


def _cones(ctx: Context, k: int):
    key = ("cones", k)
    if key not in ctx.cache:
        from .cones import crad_upper

        ctx.cache[key] = crad_upper(ctx.x, k, _apexes(ctx), ctx.config.budget_log2, mode="auto")
    return ctx.cache[key]


def stage_cones(ctx: Context) -> dict:
    from .cones import m_constants

    k = ctx.config.k
    rep = _cones(ctx, k).to_dict()
    try:
        m = m_constants(ctx.x, k, ctx.config.budget_log2)
        rep["m_constants"] = m.to_dict()
    except SearchSpaceTooLarge as exc:
        rep["m_constants"] = {"status": "budget", "detail": str(exc)}
    return rep


def _exact(ctx: Context, k: int):
    key = ("exp", k)
    if key not in ctx.cache:
        from .expansion import exp0_b, exp_b

        cfg = ctx.config
        if k == 0:
            ctx.cache[key] = exp0_b(ctx.x, "auto", cfg.budget_log2, cfg.time_limit, cfg.seed)
        else:
            ctx.cache[key] = exp_b(ctx.x, k, cfg.budget_log2)
    return ctx.cache[key]


def stage_expansion(ctx: Context) -> dict:
    from .expansion import certificate_theorem_crad, certificate_theorem_n0n1

    k = ctx.config.k
    res = _exact(ctx, k)
    out = {"result": res.to_dict(ctx.x), "bounds": []}
    try:
        out["bounds"].append(certificate_theorem_crad(ctx.x, k, exact=res, cones=_cones(ctx, k)).to_dict())
    except HypothesisUnmet as exc:
        out["bounds"].append({"theorem": "crad", "k": k, "hypothesis_unmet": str(exc)})
    if ctx.family is not None and k in (0, 1):
        fam = ctx.family
        recs = certificate_theorem_n0n1(ctx.x, fam.group, fam.subgroups,
                                        exact0=res if k == 0 else None, exact1=res if k == 1 else None,
                                        dehn_upper=_dehn(ctx).max_area if k == 1 else None,
                                        diameter=_diameter(ctx))
        out["bounds"].extend(r.to_dict() for r in recs if r.k == k)
    return out


def stage_spectral(ctx: Context) -> dict:
    from .errors import Disconnected
    from .spectral import (
        WALK_CONVENTION,
        certified_second_eigenvalue_bound,
        local_spectral_sweep,
        second_eigenvalue,
        weighted_one_skeleton,
    )

    g = weighted_one_skeleton(ctx.x)
    out = {"convention": WALK_CONVENTION}
    try:
        out["lambda2"] = round(second_eigenvalue(g), 12)
        out["lambda2_certified_upper"] = _json_default(certified_second_eigenvalue_bound(g))
    except Disconnected:
        out["lambda2"] = None
    out["sweep"] = local_spectral_sweep(ctx.x, ctx.config.lam).to_dict()
    return out


def _dehn(ctx: Context):
    if "dehn" not in ctx.cache:
        from .presentation import dehn_estimate

        m = 2 * (_diameter(ctx) + 1) + 1
        ctx.cache["dehn"] = dehn_estimate(ctx.x, m, ctx.config.dehn_samples, ctx.config.seed)
    return ctx.cache["dehn"]


def stage_presentation(ctx: Context) -> dict:
    from .presentation import (
        greedy_trace,
        path_to_word,
        q_independence_counts,
        relations_from_tables,
        sfill1_upper,
        verify_residual_relations,
    )

    fam = _need_group(ctx)
    x, g = ctx.x, fam.group
    out = {"relation_set_sizes": relations_from_tables(g, fam.subgroups).sizes()}
    worst, within, stuck = 0, True, 0
    for tri in x.faces.get(2, []):
        pw = path_to_word(x, tri)
        try:
            sb = sfill1_upper(pw.letters, greedy_trace(pw.letters, g, fam.subgroups), g, fam.subgroups)
        except HdxError:
            stuck += 1
            continue
        worst = max(worst, sb.bound)
        within &= sb.within_ceiling
    out["triangle_words"] = {"count": len(x.faces.get(2, [])), "max_sfill1_bound": worst,
                             "within_ceiling": within, "unreduced": stuck}
    out["dehn_estimate"] = _dehn(ctx).to_dict()
    if ctx.config.construction in ("unip_fq", "unip_poly") and fam.n == 3:
        res = verify_residual_relations(ctx.config.construction, [fam.q])
        out["residual_relations"] = {"holds": res["holds"],
                                     "checked": sum(v["checked"] for v in res["by_q"].values())}
    if ctx.config.construction == "unip_fq" and fam.n == 3:
        out["q_independence"] = q_independence_counts((3, 5, 7))["identical"]
    return out


def stage_checklist(ctx: Context) -> dict:
    from .expansion import evra_kaufman_checklist

    cfg = ctx.config
    return evra_kaufman_checklist(ctx.x, Fraction(cfg.epsilon_prime), cfg.lam, cfg.budget_log2)


STAGE_FUNCS: dict[str, Callable[[Context], dict]] = {
    "build": stage_build,
    "symmetry": stage_symmetry,
    "homology": stage_homology,
    "cones": stage_cones,
    "expansion": stage_expansion,
    "spectral": stage_spectral,
    "presentation": stage_presentation,
    "checklist": stage_checklist,
}


# ---------------------------------------------------------------- running


def _stages_for(command: str) -> list[str]:
    if command == "all":
        return list(STAGES)
    if command in ("build", "xsq"):
        return ["build"]
    return ["build", command]


def _write(out: Path | None, name: str, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text)


def run(cfg: ExperimentConfig, stream=sys.stdout) -> int:
    """Run the stages of cfg.command; returns the exit code."""
    try:
        cfg.validate()
    except ConfigError as exc:
        print(json.dumps({"status": "config_error", "error": str(exc)}), file=stream)
        return EXIT_CONFIG
    out = Path(cfg.out) if cfg.out else None
    header = {"config": cfg.identity(), "config_hash": cfg.hash(), "version": __version__}
    ctx = Context(cfg)
    summary = {**header, "command": cfg.command, "stages": {}}
    code = EXIT_OK
    for name in _stages_for(cfg.command):
        try:
            result = STAGE_FUNCS[name](ctx)
            status = "ok"
        except BUDGET_ERRORS as exc:
            result = {"error": type(exc).__name__, "detail": str(exc)}
            if isinstance(exc, GroupTooLarge):
                result.update(partial_size=exc.partial_size, cap=exc.cap)
            status, code = "budget_exceeded", EXIT_BUDGET
        except InvariantViolation as exc:
            result = {"error": type(exc).__name__, "detail": str(exc)}
            status, code = "invariant_violation", EXIT_INVARIANT
        except HypothesisUnmet as exc:
            result = {"error": type(exc).__name__, "detail": str(exc)}
            status = "not_applicable"
        except (HdxError, ValueError) as exc:
            result = {"error": type(exc).__name__, "detail": str(exc)}
            status, code = "config_error", EXIT_CONFIG
        except Exception as exc:  # an unexpected failure is reported as an internal error
            result = {"error": type(exc).__name__, "detail": str(exc)}
            status, code = "internal_error", EXIT_INVARIANT
        _write(out, name, {**header, "stage": name, "status": status, "result": result})
        summary["stages"][name] = status
        if name == "build" and ctx.x is not None and out is not None:
            (out / "complex.json").write_text(ctx.x.to_json() + "\n")
        if status != "ok" and status != "not_applicable":
            break
    summary["exit_code"] = code
    _write(out, "summary", summary)
    print(json.dumps(summary, sort_keys=True, default=_json_default), file=stream)
    return code


def parse_args(argv: Sequence[str] | None = None) -> ExperimentConfig:
    p = argparse.ArgumentParser(prog="hdx", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--construction", default=None, choices=CONSTRUCTIONS)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--s", type=int, default=5)
    p.add_argument("--file", default=None, help="complex JSON for --construction file")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--budget-log2", type=float, default=20.0)
    p.add_argument("--size-cap", type=int, default=DEFAULT_SIZE_CAP)
    p.add_argument("--time-limit", type=float, default=120.0, help="seconds per integer program")
    p.add_argument("--epsilon-prime", default="1/10")
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--dehn-samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="directory for JSON reports")
    a = p.parse_args(argv)
    construction = a.construction or ("xsq" if a.command == "xsq" else "unip_fq")
    if a.command == "xsq" and construction != "xsq":
        p.error("the xsq command builds the xsq construction")
    return ExperimentConfig(a.command, construction, a.n, a.q, a.s, a.file, a.k, a.budget_log2, a.size_cap,
                            a.time_limit, a.epsilon_prime, a.lam, a.dehn_samples, a.seed, a.threads, a.out)


def main(argv: Sequence[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
