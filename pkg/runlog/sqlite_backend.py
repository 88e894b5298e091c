"""
SQLite backend for the run log using SQLAlchemy.
"""

import json
import logging
import os

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from .models import Base, ExperimentRecord, MessageRecord, SessionRecord

logger = logging.getLogger(__name__)


class SQLiteRunLogBackend:
    """SQLite-backed store for sessions, their messages and experiment summaries."""

    def __init__(self, db_path="runs/qcoin.db"):
        directory = os.path.dirname(db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.engine = create_engine(f"sqlite:///{db_path}", echo=False, future=True)
        Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(bind=self.engine, future=True)

    def add_session(self, messages=(), **kwargs):
        """Store a session and its messages in one transaction."""
        kwargs["seed"] = str(kwargs["seed"])
        with self.Session() as db:
            session = SessionRecord(**kwargs)
            db.add(session)
            db.flush()
            for message in messages:
                db.add(
                    MessageRecord(
                        session_id=session.id,
                        index=message["index"],
                        phase=message["phase"],
                        sender=message["sender"],
                        payload=json.dumps(message["payload"], sort_keys=True),
                    )
                )
            db.commit()
            db.refresh(session)
            db.expunge(session)
            logger.debug(f"Stored session {session.id} with {len(messages)} messages")
            return session

    def add_experiment(self, **kwargs):
        kwargs["seed"] = str(kwargs["seed"])
        with self.Session() as db:
            experiment = ExperimentRecord(**kwargs)
            db.add(experiment)
            db.commit()
            db.refresh(experiment)
            db.expunge(experiment)
            return experiment

    def get_session(self, session_id):
        with self.Session() as db:
            session = db.get(SessionRecord, session_id)
            if session:
                db.expunge(session)
            return session

    def get_messages(self, session_id):
        with self.Session() as db:
            messages = (
                db.query(MessageRecord)
                .filter_by(session_id=session_id)
                .order_by(MessageRecord.index)
                .all()
            )
            for message in messages:
                db.expunge(message)
            return messages

    def list_sessions(self, n_pairs=None):
        with self.Session() as db:
            q = db.query(SessionRecord)
            if n_pairs:
                q = q.filter_by(n_pairs=n_pairs)
            sessions = q.order_by(SessionRecord.created).all()
            for session in sessions:
                db.expunge(session)
            return sessions

    def list_experiments(self, strategy=None):
        with self.Session() as db:
            q = db.query(ExperimentRecord)
            if strategy:
                q = q.filter_by(strategy=strategy)
            experiments = q.order_by(ExperimentRecord.created).all()
            for experiment in experiments:
                db.expunge(experiment)
            return experiments
