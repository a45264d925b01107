from __future__ import annotations

import json
from typing import Any, Iterable

from sqlalchemy import select
from sqlalchemy.orm import Session, selectinload

from volumenes.models import CheckRow, Run, VolumeRow


class RunRepo:
    def __init__(self, session: Session):
        self.session = session

    def create_run(
        self,
        *,
        command: str,
        family: str = "",
        structure_text: str = "",
        params: dict[str, Any] | None = None,
        ok: bool = True,
        kappa: float | None = None,
        chi: float | None = None,
        c0_est: float | None = None,
        slope_est: float | None = None,
    ) -> Run:
        run = Run(
            command=command,
            family=family,
            structure_text=structure_text,
            params_json=json.dumps(params or {}, sort_keys=True),
            ok=bool(ok),
            kappa=kappa,
            chi=chi,
            c0_est=c0_est,
            slope_est=slope_est,
        )
        self.session.add(run)
        self.session.flush()
        return run

    def add_volume_rows(self, run: Run, rows: Iterable[dict[str, float]]) -> int:
        n = 0
        for r in rows:
            run.volumes.append(
                VolumeRow(
                    eps=float(r["eps"]),
                    volume=float(r["volume"]),
                    volume_over_eps4=float(r["volume_over_eps4"]),
                    predicted=float(r["predicted"]),
                    rel_deviation=float(r["rel_deviation"]),
                )
            )
            n += 1
        self.session.flush()
        return n

    def add_checks(self, run: Run, checks: Iterable[tuple[str, bool, str]]) -> int:
        n = 0
        for name, ok, detail in checks:
            run.checks.append(CheckRow(name=name, ok=bool(ok), detail=detail))
            n += 1
        self.session.flush()
        return n

    def recent(self, limit: int = 20) -> list[Run]:
        stmt = (
            select(Run)
            .options(selectinload(Run.volumes), selectinload(Run.checks))
            .order_by(Run.id.desc())
            .limit(int(limit))
        )
        return list(self.session.execute(stmt).scalars().all())

    def get(self, run_id: int) -> Run | None:
        return self.session.get(Run, int(run_id))
