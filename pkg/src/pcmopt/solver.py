"""Implicit transient integration of the RC network with fixed-point melting.

Each step is a backward-Euler solve of C dT/dt = -G T + b followed by a
per-node enthalpy correction: any PCM node crossing its melt temperature has
the excess (or deficit) sensible energy converted to latent energy, and is
clamped to T_m while partially melted. Residual enthalpy past a fully
melted/solidified state is returned to sensible temperature within the same
step, so every step balances energy to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .geometry import Case, Mesh, build_mesh
from .materials import Material, builtin_material
from .network import NetworkModel, assemble_network


class SolverDivergence(RuntimeError):
    """Non-finite temperatures encountered during integration."""


class StepDiagnostics(NamedTuple):
    """Per-step energy bookkeeping, J (residual is relative)."""

    residual: float
    e_in: float
    e_out: float
    e_sensible: float
    e_latent: float


@dataclass
class ThermalState:
    """Instantaneous solver state."""

    t: float
    T: np.ndarray          # per-node temperature, degC
    phi: np.ndarray        # per-PCM-node melt fraction in [0, 1]
    stored_latent: np.ndarray  # per-PCM-node absorbed latent energy, J


@dataclass
class ThermalHistory:
    """Sampled time series of a transient run."""

    t: np.ndarray
    T_max: np.ndarray      # max chip temperature per sample, degC
    phi_mean: np.ndarray   # mean PCM melt fraction per sample
    period: float
    t_on: float
    dt: float
    T_amb_C: float
    quasi_steady_cycle: int | None = None  # first cycle of the settled run
    converged: bool = False
    energy_residual: float = 0.0  # global |in - out - stored| / in
    snapshots: list = field(default_factory=list)  # (t, T field, phi field)

    @property
    def steps_per_cycle(self) -> int:
        return round(self.period / self.dt)

    @property
    def n_cycles(self) -> int:
        return self.t.size // self.steps_per_cycle

    def cycle_slice(self, cycle: int) -> slice:
        """Sample range of one 0-based cycle."""
        n = self.steps_per_cycle
        return slice(cycle * n, (cycle + 1) * n)


class _Integrator:
    """Backward-Euler stepper with a reusable sparse factorization.

    The factorization is rebuilt only when the melt-fraction field has moved
    since the last build, since G and C depend on state only through phi.
    """

    def __init__(self, network: NetworkModel, dt: float, rebuild_tol: float = 1e-9):
        self.net = network
        self.dt = dt
        self.rebuild_tol = rebuild_tol
        self._phi_at_build = None
        self._lu = None
        self._C = None
        self._G = None
        self._b_amb = network.ambient_vector()
        self._pcm_idx = network.pcm_nodes
        self._latent_cap = network.latent_capacity
        self._conv_nodes = network.conv_nodes
        self._conv_G = network.conv_G

    def _ensure_factorized(self, phi: np.ndarray) -> None:
        if self._phi_at_build is not None and (
                phi.size == 0
                or np.max(np.abs(phi - self._phi_at_build)) <= self.rebuild_tol):
            return
        net = self.net
        phi_full = net.expand_phi(phi)
        self._C = net.capacitance(phi_full)
        self._G = net.conductance_matrix(phi_full)
        A = sp.diags(self._C / self.dt) + self._G
        self._lu = splu(A.tocsc())
        self._phi_at_build = phi.copy()

    def step(self, state: ThermalState, source_power: float) -> tuple[ThermalState, float]:
        """Advance one dt; returns (next state, per-step energy residual)."""
        net = self.net
        dt = self.dt
        self._ensure_factorized(state.phi)
        C = self._C

        b = np.zeros(net.n_nodes)
        if source_power:
            b[net.source_nodes] = source_power / net.source_nodes.size
        b += self._b_amb

        rhs = C / dt * state.T + b
        T_star = self._lu.solve(rhs)
        if not np.all(np.isfinite(T_star)):
            raise SolverDivergence(
                f"non-finite temperature at t={state.t + dt:.6g} s "
                f"(dt={dt}); reduce dt or check inputs")

        idx = self._pcm_idx
        if idx.size:
            Cp = C[idx]
            excess = Cp * (T_star[idx] - net.T_m)
            tentative = state.stored_latent + excess
            new_latent = np.clip(tentative, 0.0, self._latent_cap)
            d_latent = new_latent - state.stored_latent
            residual = excess - d_latent
            T_new = T_star.copy()
            T_new[idx] = net.T_m + residual / Cp
            phi_new = new_latent / self._latent_cap
        else:
            T_new = T_star
            new_latent = state.stored_latent
            phi_new = state.phi
            d_latent = 0.0

        # Per-step balance, evaluated with the matrices the solve used.
        e_in = source_power * dt
        e_out = float(np.sum(
            self._conv_G * (T_star[self._conv_nodes] - net.T_amb_C))) * dt
        e_sens = float(np.sum(C * (T_new - state.T)))
        e_lat = float(np.sum(d_latent))
        # floor the scale at the energy of a uniform millikelvin change so a
        # quiescent (zero-power, settled) step is not judged by roundoff
        scale = max(abs(e_in), abs(e_out), abs(e_sens) + abs(e_lat),
                    1e-3 * float(np.sum(C)))
        step_residual = abs(e_in - e_out - e_sens - e_lat) / scale

        diag = StepDiagnostics(step_residual, e_in, e_out, e_sens, e_lat)
        return ThermalState(state.t + dt, T_new, phi_new, new_latent), diag


def _resolve_pcm(case: Case) -> Material | None:
    if case.pcm_override is not None:
        return Material.from_dict(case.pcm_override)
    if case.cell.no_channel:
        return None
    return builtin_material(case.pcm_name)


def build_case_network(case: Case) -> tuple[Mesh, NetworkModel]:
    mesh = build_mesh(case.cell)
    pcm = _resolve_pcm(case)
    net = assemble_network(mesh, case.boundary, pcm=pcm)
    return mesh, net


def simulate(case: Case, dt: float = 0.01,
             quasi_steady_tol: float = 0.01,
             early_exit: bool = True,
             snapshot_every: int | None = None,
             max_step_residual: float = 1e-6,
             rebuild_tol: float = 1e-9) -> ThermalHistory:
    """Run the square-wave transient for a case.

    Starts from ambient with all PCM solid. Terminates early once the
    cyclic response has settled (three consecutive cycles whose maxima and
    minima agree within quasi_steady_tol), otherwise runs the full duration.
    """
    case.power.validate()
    power = case.power
    steps_on = power.t_on / dt
    steps_cycle = power.period / dt
    if abs(steps_on - round(steps_on)) > 1e-9 or abs(steps_cycle - round(steps_cycle)) > 1e-9:
        raise ValueError("dt must divide both t_on and the period")
    steps_on = round(steps_on)
    steps_cycle = round(steps_cycle)
    n_cycles = int(round(power.duration / power.period))

    mesh, net = build_case_network(case)
    n_pcm = net.pcm_nodes.size
    state = ThermalState(
        t=0.0,
        T=np.full(net.n_nodes, net.T_amb_C),
        phi=np.zeros(n_pcm),
        stored_latent=np.zeros(n_pcm),
    )
    stepper = _Integrator(net, dt, rebuild_tol=rebuild_tol)
    q_on_power = power.q0 * net.width  # W (unit depth)

    times, tmax, pmean = [], [], []
    snapshots = []
    cycle_max, cycle_min = [], []
    e_in_total = e_out_total = e_stored_total = 0.0
    quasi_cycle = None
    converged = False
    worst_residual = 0.0
    step_count = 0
    consecutive = 0

    for cycle in range(n_cycles):
        for k in range(steps_cycle):
            p = q_on_power if k < steps_on else 0.0
            state, diag = stepper.step(state, p)
            worst_residual = max(worst_residual, diag.residual)
            e_in_total += diag.e_in
            e_out_total += diag.e_out
            e_stored_total += diag.e_sensible + diag.e_latent
            step_count += 1
            times.append(state.t)
            tmax.append(float(state.T.max()))
            pmean.append(float(state.phi.mean()) if n_pcm else 0.0)
            if snapshot_every and step_count % snapshot_every == 0:
                snapshots.append((state.t, state.T.copy(),
                                  net.expand_phi(state.phi).reshape(mesh.ny, mesh.nx)))
        sl = slice(cycle * steps_cycle, (cycle + 1) * steps_cycle)
        cycle_max.append(max(tmax[sl]))
        cycle_min.append(min(tmax[sl]))
        if cycle >= 1:
            if (abs(cycle_max[-1] - cycle_max[-2]) < quasi_steady_tol
                    and abs(cycle_min[-1] - cycle_min[-2]) < quasi_steady_tol):
                consecutive += 1
            else:
                consecutive = 0
            if consecutive >= 3 and quasi_cycle is None:
                # 1-based index of the first cycle of the settled run
                quasi_cycle = cycle - 1
                converged = True
                if early_exit:
                    break

    if quasi_cycle is None:
        quasi_cycle = len(cycle_max)
        converged = False

    # Global conservation check over the whole run.
    denom = max(e_in_total, 1e-30)
    global_residual = abs(e_in_total - e_out_total - e_stored_total) / denom

    if worst_residual > max_step_residual:
        raise SolverDivergence(
            f"per-step energy residual {worst_residual:.3e} exceeds "
            f"{max_step_residual:.1e}")

    return ThermalHistory(
        t=np.asarray(times),
        T_max=np.asarray(tmax),
        phi_mean=np.asarray(pmean),
        period=power.period,
        t_on=power.t_on,
        dt=dt,
        T_amb_C=net.T_amb_C,
        quasi_steady_cycle=quasi_cycle,
        converged=converged,
        energy_residual=global_residual,
        snapshots=snapshots,
    )


def steady_state(case: Case, constant_flux: float,
                 phi: np.ndarray | None = None) -> np.ndarray:
    """Direct solve of G T = b for a constant (non-cyclic) source flux.

    Returns the nodal temperature field (degC) reshaped to (ny, nx).
    Used as a verification oracle; h > 0 keeps the system nonsingular.
    """
    mesh, net = build_case_network(case)
    phi_full = net.expand_phi(phi) if phi is not None else np.zeros(net.n_nodes)
    G = net.conductance_matrix(phi_full)
    b = net.source_vector(constant_flux) + net.ambient_vector()
    T = splu(G.tocsc()).solve(b)
    return T.reshape(mesh.ny, mesh.nx)
