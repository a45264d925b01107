from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from sqlalchemy.orm import Session

from volumenes.models import Run
from volumenes.repos import RunRepo
from volumenes.verification import VerificationCheck
from volumenes.volume import BallVolumeResult, ExpansionReport, predicted_ratio


@dataclass(frozen=True)
class RunSummary:
    id: int
    command: str
    family: str
    ok: bool
    kappa: float | None = None
    chi: float | None = None
    c0_est: float | None = None
    slope_est: float | None = None
    n_volumes: int = 0
    n_checks: int = 0
    n_failed: int = 0


def volume_rows(eps: Sequence[float], volumes: Sequence[float], kappa_vol: float) -> list[dict[str, float]]:
    rows = []
    for e, v in zip(eps, volumes):
        ratio = v / e**4
        pred = predicted_ratio(kappa_vol, e)
        rows.append(
            {
                "eps": e,
                "volume": v,
                "volume_over_eps4": ratio,
                "predicted": pred,
                "rel_deviation": (ratio - pred) / pred,
            }
        )
    return rows


def _summary(run: Run) -> RunSummary:
    return RunSummary(
        id=run.id,
        command=run.command,
        family=run.family,
        ok=run.ok,
        kappa=run.kappa,
        chi=run.chi,
        c0_est=run.c0_est,
        slope_est=run.slope_est,
        n_volumes=len(run.volumes),
        n_checks=len(run.checks),
        n_failed=sum(1 for c in run.checks if not c.ok),
    )


class RunService:
    def __init__(self, session: Session):
        self.session = session
        self.runs = RunRepo(session)

    def record_ball_volume(
        self,
        results: Iterable[BallVolumeResult],
        *,
        family: str,
        structure_text: str,
        params: dict[str, Any],
        kappa: float,
        chi: float,
        kappa_vol: float,
    ) -> RunSummary:
        results = list(results)
        good = [r for r in results if r.ok and r.volume is not None]
        run = self.runs.create_run(
            command="ball-volume",
            family=family,
            structure_text=structure_text,
            params=params,
            ok=len(good) == len(results),
            kappa=kappa,
            chi=chi,
        )
        self.runs.add_volume_rows(run, volume_rows([r.eps for r in good], [r.volume for r in good], kappa_vol))
        return _summary(run)

    def record_fit(
        self,
        report: ExpansionReport,
        *,
        family: str,
        structure_text: str,
        params: dict[str, Any],
    ) -> RunSummary:
        run = self.runs.create_run(
            command="fit",
            family=family,
            structure_text=structure_text,
            params=params,
            ok=report.monotone,
            kappa=report.kappa,
            chi=report.chi,
            c0_est=report.c0_est,
            slope_est=report.slope_est,
        )
        self.runs.add_volume_rows(run, volume_rows(report.eps_list, report.volumes, report.kappa_vol))
        return _summary(run)

    def record_verification(
        self,
        checks: Iterable[VerificationCheck],
        *,
        family: str = "",
        params: dict[str, Any] | None = None,
    ) -> RunSummary:
        checks = list(checks)
        run = self.runs.create_run(
            command="verify",
            family=family,
            params=params,
            ok=all(c.ok for c in checks),
        )
        self.runs.add_checks(run, ((c.name, c.ok, c.detail) for c in checks))
        return _summary(run)

    def history(self, limit: int = 20) -> list[RunSummary]:
        return [_summary(r) for r in self.runs.recent(limit)]
