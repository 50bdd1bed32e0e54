"""Runners behind the ``qtm`` subcommands. Each returns an in-memory result that
the CLI serialises: :class:`Table` -> CSV, :class:`Report` -> JSON."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from qtm import hilbert
from qtm.config import ConfigError, ExperimentConfig, echo_lines
from qtm.liouvillian import (
    DegenerateSteadyStateError,
    NotAStateError,
    Propagator,
    build_liouvillian,
    residual,
    spectral_info,
    steady_state,
)
from qtm.machines import build_machine_3q, build_machine_general
from qtm.observables import (
    concurrence_paper,
    dark_state_check,
    energy_currents,
    fidelity_pure,
    general_w,
    psi_ss_from_couplings,
    purity,
    singlet,
    w_state,
)
from qtm.oracles import limit_convergence_study, wstate_steady_check

RESIDUAL_MAX = 1e-9
TRACE_TOL = 1e-8


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]
    comments: list[str] = field(default_factory=list)
    failed: bool = False


@dataclass
class Report:
    data: dict
    failed: bool = False


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(x)
    return f"{float(x):.12g}"


def write_csv(table: Table, fh: TextIO) -> None:
    for line in table.comments:
        fh.write(f"# {line}\n")
    fh.write(",".join(table.columns) + "\n")
    for row in table.rows:
        fh.write(",".join(_fmt(x) for x in row) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    return x


def write_json(report: Report, fh: TextIO) -> None:
    json.dump(_jsonable(report.data), fh, indent=2)
    fh.write("\n")


def _header(cfg: ExperimentConfig) -> list[str]:
    return [f"qtm {cfg.experiment}", *echo_lines(cfg)]


def grid(lo: float, hi: float, points: int, scale: str) -> np.ndarray:
    if scale == "log":
        if lo <= 0:
            raise ConfigError("log-scaled grids need a positive lower bound")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


def time_grid(cfg: ExperimentConfig, gamma: float) -> np.ndarray:
    t_max = 50.0 / gamma if cfg.t_max is None else cfg.t_max
    if cfg.t_points == 1 or t_max == 0:
        return np.array([0.0])
    if cfg.t_scale == "log":
        # t = 0 first, then log spacing over four decades up to t_max
        return np.concatenate([[0.0], np.geomspace(t_max * 1e-4, t_max, cfg.t_points - 1)])
    return np.linspace(0.0, t_max, cfg.t_points)


def resolve_threads(cfg: ExperimentConfig) -> int:
    return cfg.threads or os.cpu_count() or 1


def run_evolve(cfg: ExperimentConfig) -> Table:
    """Transient from a basis state: currents, singlet fidelity, purity, trace."""
    if cfg.gamma1 is None or cfg.gamma3 is None:
        raise ConfigError("evolve needs gamma1 and gamma3 (the transient has no default coupling)")
    mcfg = cfg.machine_config()
    m = build_machine_3q(mcfg)
    sup = build_liouvillian(m.hamiltonian, m.jumps)
    bits = tuple(int(b) for b in cfg.initial)
    try:
        rho0 = m.basis_state(bits)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    target = m.project_ket(singlet().amplitudes)
    times = time_grid(cfg, min(mcfg.gamma1, mcfg.gamma3) or 1.0)
    prop = Propagator(sup)

    columns = ["t"]
    if cfg.epsilon_ghz is not None:
        columns.append("t_us")
    columns += ["J", "Q1", "Q3", "fidelity_singlet", "purity", "trace"]
    rows = []
    failed = False
    for t in times:
        rho = prop(rho0, float(t))
        cur = energy_currents(rho, m.hamiltonian, m.jumps)
        tr = float(np.trace(rho).real)
        failed |= abs(tr - 1) >= TRACE_TOL
        row = [t]
        if cfg.epsilon_ghz is not None:
            # t in units of 1/(2 pi f) with f = epsilon_ghz GHz
            row.append(t / (2 * math.pi * cfg.epsilon_ghz * 1e3))
        row += [cur.J, cur.Q1, cur.Q3, fidelity_pure(rho, target), purity(rho), tr]
        rows.append(tuple(row))
    comments = _header(cfg)
    comments.append(f"spectral gap = {_fmt(spectral_info(sup).gap)}")
    if cfg.epsilon_ghz is not None:
        comments.append("t_us = t / (2 pi epsilon_ghz) in microseconds (epsilon read as ordinary frequency)")
    return Table(columns, rows, comments, failed)


SWEEP_COLUMNS = ["mu", "U", "concurrence", "fidelity_eq4", "J_ss", "purity_ss", "steady_residual", "status"]


def sweep_point(cfg: ExperimentConfig, mu: float, U: float) -> tuple:
    nan = float("nan")
    try:
        mcfg = cfg.machine_config(mu1=float(mu), U=float(U))
        m = build_machine_3q(mcfg)
        sup = build_liouvillian(m.hamiltonian, m.jumps)
        rho = steady_state(sup)
    except DegenerateSteadyStateError:
        return (mu, U, nan, nan, nan, nan, nan, "degenerate")
    except NotAStateError:
        return (mu, U, nan, nan, nan, nan, nan, "not_a_state")
    res = residual(sup, rho)
    rho12 = hilbert.partial_trace(rho, [0, 1], 3)
    return (
        mu,
        U,
        concurrence_paper(rho12),
        fidelity_pure(rho, psi_ss_from_couplings(mcfg.g13, mcfg.g23)),
        energy_currents(rho, m.hamiltonian, m.jumps).J,
        purity(rho),
        res,
        "ok" if res < RESIDUAL_MAX else "residual",
    )


def run_sweep(cfg: ExperimentConfig) -> Table:
    """Finite-mode steady states on a (mu, U) grid; rows are row-major in mu."""
    mus = grid(cfg.mu_min, cfg.mu_max, cfg.mu_points, cfg.mu_scale)
    Us = grid(cfg.U_min, cfg.U_max, cfg.U_points, cfg.U_scale)
    points = [(float(mu), float(U)) for mu in mus for U in Us]
    threads = resolve_threads(cfg)
    if threads == 1:
        rows = [sweep_point(cfg, mu, U) for mu, U in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda p: sweep_point(cfg, *p), points))
    failed = any(r[-1] != "ok" for r in rows)
    return Table(SWEEP_COLUMNS, rows, _header(cfg), failed)


def run_limits(cfg: ExperimentConfig) -> Table:
    base = cfg.machine_config(U=cfg.U0, mu1=cfg.mu0)
    study = limit_convergence_study(base, cfg.scales)
    columns = ["scale", "mu", "U", "fidelity_eq4", "concurrence", "J_ss", "steady_residual"]
    rows = [(r.scale, r.mu, r.U, r.fidelity, r.concurrence, r.current, r.residual) for r in study]
    failed = any(r.residual >= RESIDUAL_MAX for r in study)
    return Table(columns, rows, _header(cfg), failed)


def coupling_draws(cfg: ExperimentConfig, n: int, rng: np.random.Generator) -> list[tuple[tuple[float, float], ...]]:
    if cfg.coupling_mode == "equal":
        return [((cfg.g, cfg.g),) * (n - 1)]
    if cfg.coupling_mode == "explicit":
        if len(cfg.g_first) != n - 1 or len(cfg.g_partner) != n - 1:
            raise ConfigError(f"explicit couplings need {n - 1} entries in g_first and g_partner for n={n}")
        return [tuple(zip(cfg.g_first, cfg.g_partner))]
    draws = []
    for _ in range(cfg.draws):
        g = rng.uniform(cfg.g_min, cfg.g_max, size=(n - 1, 2))
        draws.append(tuple((float(a), float(b)) for a, b in g))
    return draws


def _general_dark(cfg: ExperimentConfig, gcfg) -> dict:
    m = build_machine_general(gcfg)
    if cfg.target == "closed_form":
        target = general_w([a / b for a, b in gcfg.couplings])
    else:
        target = w_state(gcfg.n)
    report = dark_state_check(m.project_ket(target.amplitudes), m.hamiltonian, m.jumps)
    return {"target": target.label, **report.to_dict()}


def run_wstate(cfg: ExperimentConfig) -> Report:
    """Steady states of the (2n-1)-qubit machine against |W_n> and the W-like closed form."""
    rng = np.random.default_rng(cfg.seed)
    results = []
    failed = False
    for n in cfg.n_values:
        for couplings in coupling_draws(cfg, n, rng):
            gcfg = cfg.general_config(n, couplings)
            rep = wstate_steady_check(gcfg)
            failed |= rep.zero_mode_count != 1 or not rep.residual < RESIDUAL_MAX
            results.append(
                {
                    "n": n,
                    "couplings": [list(p) for p in couplings],
                    "alphas": [a / b for a, b in couplings],
                    "fidelity_general_w": rep.fidelity,
                    "fidelity_w_n": rep.fidelity_w,
                    "steady_residual": rep.residual,
                    "gap": rep.gap,
                    "zero_mode_count": rep.zero_mode_count,
                    "passed": rep.passed,
                    "dark_state": _general_dark(cfg, gcfg),
                }
            )
    return Report({"experiment": "wstate", "config": echo_lines(cfg), "results": results}, failed)


def run_darkcheck(cfg: ExperimentConfig) -> Report:
    """Dark-state conditions plus the vanishing steady-state current."""
    results = []
    failed = False
    if cfg.machine == "three_qubit":
        mcfg = cfg.machine_config()
        if not mcfg.ideal:
            raise ConfigError("darkcheck needs the ideal limits U = mu = inf")
        m = build_machine_3q(mcfg)
        target = psi_ss_from_couplings(mcfg.g13, mcfg.g23) if cfg.target == "closed_form" else singlet()
        dark = dark_state_check(m.project_ket(target.amplitudes), m.hamiltonian, m.jumps)
        entries = [(3, m, target.label, dark.to_dict(), mcfg.gamma1, mcfg.epsilon)]
    else:
        rng = np.random.default_rng(cfg.seed)
        entries = []
        for n in cfg.n_values:
            for couplings in coupling_draws(cfg, n, rng):
                gcfg = cfg.general_config(n, couplings)
                m = build_machine_general(gcfg)
                dark = _general_dark(cfg, gcfg)
                entries.append((gcfg.n_qubits, m, dark.pop("target"), dark, gcfg.gamma1, gcfg.epsilon))
    for n_qubits, m, label, dark, gamma1, eps in entries:
        sup = build_liouvillian(m.hamiltonian, m.jumps)
        try:
            rho = steady_state(sup)
        except DegenerateSteadyStateError as exc:
            failed = True
            results.append({"n_qubits": n_qubits, "target": label, "dark_state": dark, "error": str(exc)})
            continue
        cur = energy_currents(rho, m.hamiltonian, m.jumps)
        bound = 1e-9 * gamma1 * eps
        results.append(
            {
                "n_qubits": n_qubits,
                "target": label,
                "dark_state": dark,
                "J_ss": cur.J,
                "Q1_ss": cur.Q1,
                "Q3_ss": cur.Q3,
                "zero_current": abs(cur.J) < bound,
                "steady_residual": residual(sup, rho),
                "passed": bool(dark["passed"] and abs(cur.J) < bound),
            }
        )
    return Report({"experiment": "darkcheck", "config": echo_lines(cfg), "results": results}, failed)


RUNNERS = {
    "evolve": run_evolve,
    "sweep": run_sweep,
    "limits": run_limits,
    "wstate": run_wstate,
    "darkcheck": run_darkcheck,
}


def run(cfg: ExperimentConfig):
    return RUNNERS[cfg.experiment](cfg)

