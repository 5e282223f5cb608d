"""Command-line entry point: ``cact``."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import mixed_example as mx
from .committee import (
    CommitteeModel,
    gamma_given_one,
    is_sigma1_equilibrium,
    optimal_threshold,
    similarity_effect,
)
from .equilibrium2 import check_condition_m, enumerate_equilibria, is_equilibrium
from .errors import CactError, NonnegativityViolated, ParseError, UnknownName
from .extensions import (
    PolicymakerModel,
    informativeness_comparison,
    optimal_info_search,
)
from .outcomes import conditional_success_given_turnout, success_probability, welfare
from .population import poisson_pmf
from .scenario import Profile, Scenario
from .scenario_file import bundled, load_scenario
from .signal_info import SimilarityTransform, make_fc
from .simulate import SimConfig, run_trials
from .verify import SUITES, run_suite

SWEEP_COLUMNS = ("alpha", "s_star", "pi_star", "welfare_star", "env", "n_equilibria", "condition_m")
REPRODUCE = ("intro", "b4-optimal", "b3-aggregation", "c-regions")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, Fraction)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def emit(data) -> None:
    click.echo(json.dumps(_jsonable(data), indent=2))


def emit_rows(rows: list[dict], columns) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    click.echo(buf.getvalue(), nl=False)


class Check:
    """Collects named pass/fail checks for reproduce targets."""

    def __init__(self):
        self.items = []

    def __call__(self, name: str, ok: bool, **values):
        self.items.append({"check": name, "pass": bool(ok), **values})
        return ok

    @property
    def ok(self) -> bool:
        return all(i["pass"] for i in self.items)


def _load(ctx, path) -> Scenario:
    return load_scenario(path, exact=ctx.obj["exact"], tol=ctx.obj["tol"])


def _finish(ctx, ok: bool):
    ctx.exit(0 if ok else 1)


@click.group()
@click.option("--tol", type=float, default=1e-9, show_default=True, help="Incentive-constraint tolerance.")
@click.option("--exact", is_flag=True, help="Rational arithmetic (tolerance 0).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("--out", type=click.Choice(["csv", "json"]), default=None, help="Output format.")
@click.pass_context
def main(ctx, tol, exact, seed, jobs, out):
    """Participation equilibria under correlated private signals."""
    ctx.obj = {"tol": tol, "exact": exact, "seed": seed, "jobs": jobs, "out": out}


def _outcomes(scn: Scenario, sigma: Profile) -> dict | None:
    if not (sigma.is_symmetric and scn.is_poisson_det):
        return None
    out = {"pi": success_probability(scn, sigma.p1), "welfare": welfare(scn, sigma.p1)}
    try:
        out["conditional_success"] = conditional_success_given_turnout(scn, sigma.p1)
    except CactError:
        out["conditional_success"] = None
    return out


@main.command()
@click.option("--scenario", "path", required=True, type=click.Path())
@click.pass_context
def analyze(ctx, path):
    """Equilibria, environment and outcomes of a scenario."""
    scn = _load(ctx, path)
    piv = scn.pivotal
    rep = enumerate_equilibria(scn)
    cond = check_condition_m(scn)
    data = {
        "posteriors": [float(v) for v in scn.info.posteriors],
        "environment": piv.environment.value,
        "assumption1": piv.assumption1,
        "lambdas": {"two": piv.lambda2, "own": piv.lambda1, "outside": piv.lambda_o, "none": piv.lambda_none},
        **rep.to_json(scn),
        "condition_m": {"holds": cond.holds, "checked": cond.checked, "failures": len(cond.failures)},
        "outcomes": _outcomes(scn, rep.canonical),
    }
    if ctx.obj["out"] == "csv":
        emit_rows([{"environment": data["environment"], "s_star": data["s_star"],
                    "n_equilibria": len(rep.equilibria), "condition_m": cond.holds}],
                  ("environment", "s_star", "n_equilibria", "condition_m"))
    else:
        emit(data)


def sweep_row(scn: Scenario, alpha: float) -> dict:
    rep = enumerate_equilibria(scn)
    best = rep.canonical
    outs = _outcomes(scn, best) or {}
    return {
        "alpha": alpha,
        "s_star": float(rep.s_star),
        "pi_star": outs.get("pi", ""),
        "welfare_star": outs.get("welfare", ""),
        "env": scn.pivotal.environment.value,
        "n_equilibria": len(rep.equilibria),
        "condition_m": check_condition_m(scn).holds,
    }


def sweep_rows(scn: Scenario, pair: tuple[int, int], alphas, state: int = 1) -> list[dict]:
    """One row per transfer size; infeasible sizes give a row marked ``invalid``."""
    rows = []
    for a in alphas:
        try:
            shifted = scn.with_eti(SimilarityTransform(pair, float(a), state)) if a > 0 else scn
            rows.append(sweep_row(shifted, float(a)))
        except NonnegativityViolated:
            rows.append({"alpha": float(a), "s_star": "", "pi_star": "", "welfare_star": "",
                         "env": "invalid", "n_equilibria": "", "condition_m": ""})
    return rows


def monotone_summary(rows: list[dict]) -> dict:
    vals = [r["s_star"] for r in rows if r["env"] != "invalid"]
    return {
        "nondecreasing": all(b >= a - 1e-9 for a, b in itertools.pairwise(vals)),
        "nonincreasing": all(b <= a + 1e-9 for a, b in itertools.pairwise(vals)),
    }


@main.command()
@click.option("--scenario", "path", type=click.Path(), help="Scenario file.")
@click.option("--intro", nargs=3, type=float, default=None, metavar="Q P C",
              help="Use the two-player game instead of a scenario file.")
@click.option("--pair", nargs=2, default=None, help="Signal labels whose similarity is raised.")
@click.option("--state", type=int, default=1, show_default=True)
@click.option("--alpha-min", type=float, default=0.0, show_default=True)
@click.option("--alpha-max", type=float, required=True)
@click.option("--steps", type=int, default=11, show_default=True, help="Grid points (0 for none).")
@click.pass_context
def sweep(ctx, path, intro, pair, state, alpha_min, alpha_max, steps):
    """Maximal equilibrium along a grid of similarity transfers.

    Columns: alpha, s_star, pi_star and welfare_star (success and welfare at the
    maximal profile, blank when not closed-form), env, n_equilibria, condition_m.
    A summary of the s_star direction goes to stderr.
    """
    if intro is not None:
        q, p, c = intro
        scn = mx.embed_two_player(q, p, 0.0, c)
        idx = (0, 1)
    elif path is not None:
        scn = _load(ctx, path)
        if pair is None:
            raise click.UsageError("--pair is required with --scenario")
        labels = [_label(scn, v) for v in pair]
        idx = tuple(sorted(scn.info.space.indices(labels)))
    else:
        raise click.UsageError("give --scenario or --intro")
    alphas = np.linspace(alpha_min, alpha_max, steps) if steps > 0 else []
    rows = sweep_rows(scn, idx, alphas, state)
    if ctx.obj["out"] == "json":
        emit({"rows": rows, "summary": monotone_summary(rows)})
    else:
        emit_rows(rows, SWEEP_COLUMNS)
        click.echo(json.dumps(monotone_summary(rows)), err=True)


def _label(scn: Scenario, text: str):
    labels = scn.info.space.labels
    for lab in labels:
        if str(lab) == str(text):
            return lab
    raise ParseError(f"unknown signal {text!r}")


def parse_sigma(scn: Scenario, text: str):
    """``{"P1": [...], "P2": [...]}`` with signal labels, or two probability vectors."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed --sigma: {exc}") from exc
    if isinstance(data, dict):
        space = scn.info.space
        return Profile.of(space.indices(data.get("P1", [])), space.indices(data.get("P2", [])), scn.n)
    return np.asarray(data, dtype=float)


@main.command()
@click.option("--scenario", "path", required=True, type=click.Path())
@click.option("--sigma", required=True, help='e.g. \'{"P1": [3], "P2": [3]}\'')
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--all-states", is_flag=True, help="Draw the state from the prior instead of fixing it.")
@click.pass_context
def simulate(ctx, path, sigma, trials, all_states):
    """Monte Carlo estimates with standard errors."""
    scn = _load(ctx, path)
    prof = parse_sigma(scn, sigma)
    cfg = SimConfig(trials, ctx.obj["seed"], not all_states, ctx.obj["jobs"])
    res = run_trials(scn, prof, cfg).to_json()
    if isinstance(prof, Profile):
        from .equilibrium2 import expected_participation

        res["analytic"] = {"s": float(expected_participation(scn, prof)), **(_outcomes(scn, prof) or {})}
    emit(res)


def reproduce_intro() -> Check:
    chk = Check()
    c, p = 0.6, 1 / 3
    before = mx.two_player_thresholds(c, mx.p_tilde(p, 0))
    alpha = 2 / 9
    after = mx.two_player_thresholds(c, mx.p_tilde(p, alpha))
    chk("q_star_independent", abs(before.q_star - 0.8) <= 1e-9, value=before.q_star, expected=0.8)
    chk("p_tilde_after", abs(mx.p_tilde(p, alpha) - 1) <= 1e-9, value=mx.p_tilde(p, alpha), expected=1.0)
    chk("q_double_star_after", abs(after.q_double_star - 0.4) <= 1e-9, value=after.q_double_star, expected=0.4)
    both = Profile(0b10, 0b10)
    for q, a, want in ((0.85, 0, True), (0.75, 0, False), (0.35, alpha, True), (0.45, alpha, False)):
        got = is_equilibrium(mx.embed_two_player(q, p, a, c), both).ok
        chk(f"engine_both_work_q{q}_alpha{a:.4g}", got == want, value=got, expected=want)
    return chk


def reproduce_three_signal(seed: int = 0, restarts: int = 10) -> tuple[Check, dict]:
    chk = Check()
    scn = load_scenario(bundled("three_signal"))
    mu = [float(v) for v in scn.info.posteriors]
    chk("posteriors", np.allclose(mu, [0.2941, 0.4615, 0.9000], atol=5e-5, rtol=0), value=mu)
    psi1, psi2 = float(poisson_pmf(20, 15)), float(poisson_pmf(20, 30))
    chk("psi_20_15", abs(psi1 - 0.0418) <= 5e-4, value=psi1, expected=0.0418)
    chk("psi_20_30", abs(psi2 - 0.0134) <= 5e-4, value=psi2, expected=0.0134)
    rep = enumerate_equilibria(scn)
    nontrivial = [p for p in rep.equilibria if p != Profile(0, 0)]
    chk("independent_unique_nontrivial", nontrivial == [Profile(0b100, 0b100)],
        value=[rep.to_json(scn)["equilibria"]])
    two_three = Profile(0b110, 0b110)
    shifted = scn.with_eti(SimilarityTransform((0, 1), 0.005))
    eq = is_equilibrium(shifted, two_three)
    s_shift = enumerate_equilibria(shifted).s_star
    chk("transfer_supports_2_3", eq.ok, s_star=float(s_shift))
    fc = scn.with_info(scn.info.with_joint(1, make_fc(scn.info.marginal1)))
    rej = is_equilibrium(fc, two_three)
    witness = None if rej.ok else {"signal": scn.info.space.labels[rej.violation.signal],
                                   "constraint": rej.violation.constraint}
    chk("full_correlation_rejects_2_3", not rej.ok, witness=witness)
    found = optimal_info_search(scn, restarts=restarts, seed=seed)
    chk("search_reaches_transfer_value", found.s_star >= float(s_shift) - 1e-9, value=found.s_star)
    cert = {
        "alpha": {f"{scn.info.space.labels[i]},{scn.info.space.labels[k]}": a
                  for (i, k), a in found.alpha_table().items()},
        "profile": scn.info.space.subset_labels(found.profile.p1),
        "s_star": found.s_star,
    }
    return chk, cert


def reproduce_policymaker() -> tuple[Check, dict]:
    chk = Check()
    raw = bundled("turnout_policymaker")
    jhat = load_scenario(raw)
    shift = raw["shift"]
    j = jhat.with_eti(SimilarityTransform(tuple(jhat.info.space.indices(shift["pair"])), shift["mass"]))
    pm = PolicymakerModel(raw["policymaker"]["belief_cutoff"])
    rep = informativeness_comparison(j, jhat, pm)
    chk("theta_star", rep.theta_star == 28, value=rep.theta_star, expected=28)
    v = rep.after.violation
    witness = None if v is None else {"signal": jhat.info.space.labels[v.signal], "group": v.group,
                                      "constraint": v.constraint, "gain": v.gain}
    chk("broken_after_shift", not rep.after.ok and witness is not None, witness=witness)
    cert = {
        "theta_star": rep.theta_star,
        "broken_ic_witness": witness,
        "equilibrium_before_shift": rep.holds_before,
        "cost_window_before": rep.window_before,
        "cost_window_after": rep.window_after,
        "branch": rep.branch,
    }
    return chk, cert


C_REGION_COSTS = (0.55, 0.6, 0.75)
REGION_ORDER = {mx.SIGMA0: 0, mx.SIGMA_A: 1, mx.SIGMA_BETA: 2, mx.SIGMA1: 3}


def region_grid(c: float, size: int = 200) -> list[tuple[float, float, str]]:
    """Maximal-equilibrium labels at cell centres of a ``size`` x ``size`` grid in (q, p_tilde)."""
    pts = (np.arange(size) + 0.5) / size
    return [(float(q), float(pt), mx.two_player_maximal(q, c, pt).label) for pt in pts for q in pts]


def reproduce_c_regions(size: int = 200) -> tuple[Check, dict]:
    """Region map; above q = 1/2 the maximal profile must move up
    sigma0 -> sigma_a -> sigma_beta -> sigma1 as q rises."""
    chk = Check()
    counts = {}
    for c in C_REGION_COSTS:
        grid = region_grid(c, size)
        tally: dict[str, int] = {}
        monotone = True
        for row in range(size):
            cells = grid[row * size:(row + 1) * size]
            ranks = [REGION_ORDER[lab] for q, _, lab in cells if q > 0.5 and lab in REGION_ORDER]
            monotone &= all(a <= b for a, b in itertools.pairwise(ranks))
            for *_, lab in cells:
                tally[lab] = tally.get(lab, 0) + 1
        counts[str(c)] = tally
        chk(f"ordered_regions_c{c}", monotone)
    return chk, {"counts": counts}


@main.command()
@click.argument("name")
@click.option("--restarts", type=int, default=10, show_default=True, help="Search restarts (b4-optimal).")
@click.pass_context
def reproduce(ctx, name, restarts):
    """Re-derive a worked example: intro, b4-optimal, b3-aggregation, c-regions."""
    if name not in REPRODUCE:
        raise UnknownName(f"unknown example {name!r}; choose from {', '.join(REPRODUCE)}")
    extra = {}
    if name == "intro":
        chk = reproduce_intro()
    elif name == "b4-optimal":
        chk, extra = reproduce_three_signal(ctx.obj["seed"], restarts)
    elif name == "b3-aggregation":
        chk, extra = reproduce_policymaker()
    else:
        chk, extra = reproduce_c_regions()
    if ctx.obj["out"] == "csv":
        emit_rows([{"check": i["check"], "pass": i["pass"]} for i in chk.items], ("check", "pass"))
    else:
        emit({"example": name, "pass": chk.ok, "checks": chk.items, **extra})
    _finish(ctx, chk.ok)


@main.command()
@click.argument("suite", type=click.Choice(SUITES))
@click.option("--instances", type=int, default=100, show_default=True)
@click.pass_context
def verify(ctx, suite, instances):
    """Randomized check of a comparative-statics result; failures are dumped as JSON."""
    rep = run_suite(suite, instances, ctx.obj["seed"], ctx.obj["jobs"])
    if ctx.obj["out"] == "csv":
        row = {k: v for k, v in rep.to_json().items() if k != "counterexamples"}
        emit_rows([row], row.keys())
    else:
        emit(rep.to_json())
    _finish(ctx, rep.ok)


def load_committee(path) -> CommitteeModel:
    try:
        data = json.loads(Path(path).read_text())
        return CommitteeModel(
            size=int(data["G"]),
            count_pmf=data["count_pmf"],
            prior=float(data["prior"]),
            marginal0=float(data["marginal0"]),
            cost=float(data["cost"]),
            theta_bar=int(data.get("theta_bar", 0)),
            marginal1=data.get("marginal1"),
        )
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"cannot read committee model {path}: {exc}") from exc


@main.command()
@click.option("--model", "path", required=True, type=click.Path())
@click.option("--compare", "other", type=click.Path(), help="A less similar committee to compare against.")
@click.option("--analyze", is_flag=True, help="Sincere-voting analysis (always printed).")
@click.option("--optimal-threshold", "optimal", is_flag=True)
@click.pass_context
def committee(ctx, path, other, analyze, optimal):
    """Sincere voting in a committee with binary signals."""
    model = load_committee(path)
    data = {
        "posterior_one": model.posterior(1),
        "gamma": gamma_given_one(model),
        "sigma1_equilibrium": is_sigma1_equilibrium(model, ctx.obj["tol"]),
    }
    if optimal:
        data["optimal_threshold"] = optimal_threshold(model, ctx.obj["tol"])
    if other:
        eff = similarity_effect(model, load_committee(other))
        data["similarity_effect"] = eff._asdict()
    emit(data)


def run():
    try:
        # without standalone mode click returns the exit code instead of raising
        code = main(standalone_mode=False)
    except CactError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)
    if isinstance(code, int) and code:
        sys.exit(code)


if __name__ == "__main__":
    run()
