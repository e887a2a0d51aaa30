from .config import Scenario, ScenarioError, dump_scenario, load_scenario, scenario_from_dict
from .experiment import Cell, TrialRecord, run_sweep, run_trial
from .io import ccdf_table, emit_results

__all__ = [
    "Cell", "Scenario", "ScenarioError", "TrialRecord", "ccdf_table", "dump_scenario",
    "emit_results", "load_scenario", "run_sweep", "run_trial", "scenario_from_dict",
]
