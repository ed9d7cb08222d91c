"""Distributed economic dispatch for a microgrid behind an Energy Router."""

from .engine import AgentState, ErState, PowerLawGain, ProtocolConfig, gc_round, initial_state, int_round
from .model import GeneratorParams, SystemParams, bus_mismatch, cost, line_loss, project_power
from .oracle import AmbiguousRoot, DispatchSolution, NoRoot, solve_grid_connected, solve_isolated, verify_kkt
from .scenario import ScenarioConfig, SimulationTrace, load_config, run, validate
from .topology import GridGraph, build_derived, lemma1_spectral_check, step_size_bounds

__version__ = "0.1.0"
