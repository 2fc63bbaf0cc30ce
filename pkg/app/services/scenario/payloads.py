from typing import Any, Dict, Iterable, Tuple

from app.services.analysis.report import AnalysisReport
from app.services.spectral.roots import CoalescenceReport
from app.services.spectral.sweep import SweepEvent, SweepTrajectory


def report_payload(report: AnalysisReport, t_prime: float, mode_id: str, source: str) -> Dict[str, Any]:
    payload = report.model_dump(mode="json")
    payload.update({"mode_id": mode_id, "t_prime": t_prime, "source": source})
    return payload


def events_payload(traj: SweepTrajectory, certified: Iterable[Tuple[SweepEvent, CoalescenceReport]]) -> Dict[str, Any]:
    return {
        "parameter": traj.parameter,
        "events": [e.to_dict() for e in traj.events],
        "certified": [{"event": e.to_dict(), "result": r.to_dict()} for e, r in certified],
    }
