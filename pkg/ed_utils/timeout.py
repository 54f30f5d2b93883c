from functools import wraps
from queue import Queue
from threading import Thread


def _call(results, args, kwargs, method):
    try:
        results.put(method(*args, **kwargs))
    except Exception as e:
        results.put(e)


def timeout(sec=30):
    """Fail a test that has not returned after sec seconds."""
    def timeout_dec(func):
        @wraps(func)
        def test(*args, **kwargs):
            results = Queue()
            worker = Thread(target=_call, args=[results, args, kwargs, func], daemon=True)
            worker.start()
            worker.join(sec)

            if worker.is_alive():
                # The thread cannot be killed; the remaining tests keep running.
                raise TimeoutError(f"{func.__name__} timed out after {sec} seconds")
            x = results.get()
            if isinstance(x, Exception):
                raise x
            return x
        return test
    return timeout_dec
