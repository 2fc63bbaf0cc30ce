from app.services.scenario.reproduce import SUITES, reproduce
from app.services.scenario.runner import RunResult, run_scenario
from app.services.scenario.schema import GridRange, ScenarioConfig, parse_config
