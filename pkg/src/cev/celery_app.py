"""
Celery configuration for distributing Monte Carlo chunks
"""
from celery import Celery

from . import settings

# Without a broker, tasks are only ever run in-process through Task.apply
broker_url = settings.broker_url()

if broker_url:
    settings.status(f"🔗 Using broker URL: {broker_url}")

# Create Celery app
app = Celery("cev", include=["src.cev.tasks"])

# Configure Celery
app.conf.update(
    broker_url=broker_url or "memory://",
    result_backend=broker_url,
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    # Task routing
    task_routes={
        "cev.simulate_chunk": {"queue": "mc_paths"},
    },
    # Task execution settings
    task_acks_late=True,
    worker_prefetch_multiplier=1,
    # Result settings
    result_expires=3600,  # 1 hour
    # Retry settings
    task_default_retry_delay=5,
    task_max_retries=3,
)

if __name__ == "__main__":
    app.start()
