"""
SQLAlchemy ORM models for the run log.
"""

import datetime
import uuid

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


def generate_uuid():
    return str(uuid.uuid4())


def utcnow():
    return datetime.datetime.now(datetime.timezone.utc)


class SessionRecord(Base):
    """One protocol session: its configuration echo and final result."""

    __tablename__ = "sessions"
    id = Column(String, primary_key=True, default=generate_uuid)
    created = Column(DateTime, default=utcnow)
    n_pairs = Column(Integer, nullable=False)
    seed = Column(String, nullable=False)  # may exceed SQLite's signed 64-bit range
    gamma = Column(Float, nullable=True)
    strategy = Column(String, default="honest")
    verdict = Column(String, nullable=True)
    coin = Column(String, nullable=True)
    alice_coin = Column(Integer, nullable=True)
    bob_coin = Column(Integer, nullable=True)
    messages = relationship(
        "MessageRecord", back_populates="session", order_by="MessageRecord.index"
    )


class MessageRecord(Base):
    """A single protocol message, payload stored as JSON text."""

    __tablename__ = "messages"
    id = Column(String, primary_key=True, default=generate_uuid)
    session_id = Column(String, ForeignKey("sessions.id"))
    index = Column(Integer, nullable=False)
    phase = Column(String, nullable=False)
    sender = Column(String, nullable=False)
    payload = Column(Text, nullable=False)
    session = relationship("SessionRecord", back_populates="messages")


class ExperimentRecord(Base):
    """Summary of one Monte Carlo experiment."""

    __tablename__ = "experiments"
    id = Column(String, primary_key=True, default=generate_uuid)
    created = Column(DateTime, default=utcnow)
    strategy = Column(String, nullable=False)
    n_pairs = Column(Integer, nullable=False)
    trials = Column(Integer, nullable=False)
    successes = Column(Integer, nullable=False)
    estimate = Column(Float, nullable=False)
    ci_low = Column(Float, nullable=False)
    ci_high = Column(Float, nullable=False)
    forced_coin_rate = Column(Float, nullable=False)
    parity_mismatches = Column(Integer, default=0)
    seed = Column(String, nullable=False)
    gamma = Column(Float, nullable=True)
