from __future__ import annotations

import logging
import socket
import sys
import threading
import time

import httpx

from nonlocal_bh.core.settings import get_solver_settings

_ERROR_NOTIFY_THROTTLE_SEC = 30
_WEBHOOK_MAX_CHARS = 1900
_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s - %(message)s"

# logger.error(..., extra={RUN_PARAMS_ATTR: (dim, N, delta, c)}) 로 실패한 run 을 붙인다.
RUN_PARAMS_ATTR = "run_params"


def _run_params(record: logging.LogRecord) -> tuple | None:
    params = getattr(record, RUN_PARAMS_ATTR, None)
    return tuple(params) if params is not None else None


def _payload(message: str, run_params: tuple | None = None) -> dict:
    header = f"[nonlocal_bh@{socket.gethostname()}]"
    if run_params is not None:
        dim, n_cells, delta, c = run_params
        header += f" run dim={dim} N={n_cells} delta={delta!r} c={c!r}"
    return {"content": f"{header}\n```\n{message[:_WEBHOOK_MAX_CHARS]}\n```"}


class WebhookErrorHandler(logging.Handler):
    """ERROR 이상 로그를 웹훅으로 전송.

    스윕 중 run 실패 알림용. run_params 가 붙은 레코드는 (dim, N, delta, c)
    조합마다 한 번, 그 외에는 로거+포맷 문자열마다 throttle_sec 에 한 번 보낸다.
    전송은 데몬 스레드에서 하고 실패해도 예외를 올리지 않는다.
    """

    def __init__(self, webhook_url: str, throttle_sec: int = _ERROR_NOTIFY_THROTTLE_SEC):
        super().__init__(level=logging.ERROR)
        self._webhook_url = webhook_url
        self._throttle_sec = throttle_sec
        self._last_sent: dict[tuple, float] = {}
        self._lock = threading.Lock()

    def _throttle_key(self, record: logging.LogRecord) -> tuple:
        # 치환 전 record.msg 기준. 같은 run 의 재시도/중복 로그는 묶인다.
        return (record.name, record.levelname, record.msg, _run_params(record))

    def _should_send(self, record: logging.LogRecord) -> bool:
        key = self._throttle_key(record)
        now = time.monotonic()
        with self._lock:
            last = self._last_sent.get(key)
            if last is not None and now - last < self._throttle_sec:
                return False
            self._last_sent[key] = now
        return True

    def emit(self, record: logging.LogRecord) -> None:
        if not self._should_send(record):
            return
        try:
            payload = _payload(self.format(record), _run_params(record))
        except Exception:
            return
        threading.Thread(target=self._post, args=(payload,), daemon=True).start()

    def _post(self, payload: dict) -> None:
        try:
            with httpx.Client(timeout=10) as client:
                client.post(self._webhook_url, json=payload)
        except Exception:
            pass


def setup_logging(level: int | str | None = None) -> None:
    """루트 로거 설정. 표준 출력은 CLI 결과(slope=...) 전용이라 로그는 stderr 로 보낸다."""
    logger = logging.getLogger()
    if logger.handlers:
        return  # 중복 설정 방지
    settings = get_solver_settings()
    logger.setLevel(level if level is not None else settings.log_level)
    formatter = logging.Formatter(_LOG_FORMAT)
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(formatter)
    logger.addHandler(stream)

    if settings.error_webhook_url:
        webhook = WebhookErrorHandler(settings.error_webhook_url)
        webhook.setFormatter(formatter)
        logger.addHandler(webhook)
