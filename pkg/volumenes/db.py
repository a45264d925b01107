from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator

from sqlalchemy import create_engine, func, inspect, select
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from volumenes.models import Base, Run


def create_engine_from_url(database_url: str) -> Engine:
    if not database_url.startswith("sqlite:"):
        return create_engine(database_url, future=True)

    engine = create_engine(
        database_url,
        future=True,
        connect_args={"check_same_thread": False},
    )
    with engine.connect() as conn:
        # WAL no aplica a :memory:; foreign_keys activa el borrado en cascada de filas
        if ":memory:" not in database_url:
            conn.exec_driver_sql("PRAGMA journal_mode=WAL;")
        conn.exec_driver_sql("PRAGMA foreign_keys=ON;")
    return engine


def init_db(engine: Engine) -> None:
    Base.metadata.create_all(engine)


def reset_db(engine: Engine) -> int:
    """Borra todas las tablas del historial y las recrea. Devuelve las corridas descartadas."""
    dropped = 0
    if inspect(engine).has_table(Run.__tablename__):
        with engine.connect() as conn:
            dropped = int(conn.execute(select(func.count()).select_from(Run)).scalar_one())
    Base.metadata.drop_all(engine)
    Base.metadata.create_all(engine)
    return dropped


def make_session_factory(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(bind=engine, autoflush=False, autocommit=False, future=True)


@contextmanager
def session_scope(session_factory: sessionmaker[Session]) -> Iterator[Session]:
    session = session_factory()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


@contextmanager
def run_store(database_url: str) -> Iterator[Session]:
    """Abre el historial (creando tablas si faltan) y entrega una sesión transaccional."""
    engine = create_engine_from_url(database_url)
    try:
        init_db(engine)
        with session_scope(make_session_factory(engine)) as session:
            yield session
    finally:
        engine.dispose()
