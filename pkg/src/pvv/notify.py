"""Notification delivery. The payload is built once per broadcast; every
recipient, including the observer T2, receives identical bytes."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Message:
    recipient: str
    subject: str
    body: str


class Notifier(ABC):
    @abstractmethod
    def send(self, message: Message) -> None:
        ...


class LogNotifier(Notifier):
    """Collects messages in memory; the default for tests and simulations."""

    def __init__(self):
        self.messages: list[Message] = []

    def send(self, message: Message) -> None:
        self.messages.append(message)
        logger.debug("notify %s: %s", message.recipient, message.subject)


class SmtpNotifier(Notifier):
    """Thin SMTP adapter for deployments. Same payloads as the log sink."""

    def __init__(self, host: str, port: int = 25, sender: str = "voting@localhost"):
        self.host = host
        self.port = port
        self.sender = sender

    def send(self, message: Message) -> None:
        import smtplib
        from email.message import EmailMessage

        email = EmailMessage()
        email["From"] = self.sender
        email["To"] = message.recipient
        email["Subject"] = message.subject
        email.set_content(message.body)
        with smtplib.SMTP(self.host, self.port) as smtp:
            smtp.send_message(email)
