from __future__ import annotations

from datetime import datetime

from sqlalchemy import Boolean, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    pass


class Run(Base):
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=False), nullable=False, default=datetime.utcnow)

    command: Mapped[str] = mapped_column(String(40), nullable=False, index=True)
    family: Mapped[str] = mapped_column(String(120), nullable=False, default="")
    structure_text: Mapped[str] = mapped_column(Text, nullable=False, default="")
    params_json: Mapped[str] = mapped_column(Text, nullable=False, default="{}")
    ok: Mapped[bool] = mapped_column(Boolean, nullable=False, default=True)

    # Invariantes en el origen y resultado del ajuste (solo `fit`)
    kappa: Mapped[float | None] = mapped_column(Float, nullable=True)
    chi: Mapped[float | None] = mapped_column(Float, nullable=True)
    c0_est: Mapped[float | None] = mapped_column(Float, nullable=True)
    slope_est: Mapped[float | None] = mapped_column(Float, nullable=True)

    volumes: Mapped[list["VolumeRow"]] = relationship(
        "VolumeRow", back_populates="run", cascade="all, delete-orphan", order_by="VolumeRow.id"
    )
    checks: Mapped[list["CheckRow"]] = relationship(
        "CheckRow", back_populates="run", cascade="all, delete-orphan", order_by="CheckRow.id"
    )


class VolumeRow(Base):
    __tablename__ = "volume_rows"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False, index=True)

    eps: Mapped[float] = mapped_column(Float, nullable=False)
    volume: Mapped[float] = mapped_column(Float, nullable=False)
    volume_over_eps4: Mapped[float] = mapped_column(Float, nullable=False)
    predicted: Mapped[float] = mapped_column(Float, nullable=False)
    rel_deviation: Mapped[float] = mapped_column(Float, nullable=False)

    run: Mapped[Run] = relationship("Run", back_populates="volumes")


class CheckRow(Base):
    __tablename__ = "check_rows"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False, index=True)

    name: Mapped[str] = mapped_column(String(80), nullable=False)
    ok: Mapped[bool] = mapped_column(Boolean, nullable=False)
    detail: Mapped[str] = mapped_column(Text, nullable=False, default="")

    run: Mapped[Run] = relationship("Run", back_populates="checks")
