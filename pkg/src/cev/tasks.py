"""
Celery tasks for Monte Carlo path simulation
"""
import sys

from .celery_app import app
from .errors import CevError
from .model import CevParams
from .oracle import SdeConfig, chunk_accumulator
from .pricing import OptionKind
from .settings import status


@app.task(bind=True, name="cev.simulate_chunk")
def simulate_chunk_task(self, payload, chunk, size):
    """
    Simulate one chunk of paths and return its payoff accumulator

    Args:
        payload (dict): Contains params (CevParams fields), kind and config (SdeConfig fields)
        chunk (int): Chunk index, selects the random substream
        size (int): Number of paths in this chunk
    """
    try:
        status(f"🚀 Starting simulate_chunk_task: {self.request.id} (chunk {chunk}, {size} paths)")

        p = CevParams.model_validate(payload["params"])
        cfg = SdeConfig.model_validate(payload["config"])
        kind = OptionKind(payload["kind"])

        result = chunk_accumulator(p, kind, cfg, chunk, size)

        status(f"✅ Completed simulate_chunk_task: {self.request.id}")
        return result

    except (CevError, ValueError) as exc:
        print(f"❌ Error in simulate_chunk_task: {self.request.id} - {str(exc)}", file=sys.stderr)
        raise
    except Exception as exc:
        print(f"❌ Error in simulate_chunk_task: {self.request.id} - {str(exc)}", file=sys.stderr)
        # Retry the task
        raise self.retry(exc=exc, countdown=5, max_retries=3)
