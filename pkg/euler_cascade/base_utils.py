import concurrent.futures
import math
import os
from contextlib import AbstractContextManager
from sys import stderr

import numpy as np

DEBUG = False

THREADS_ENV = "CASCADE_THREADS"


def set_debug(value=True):
    """ Activate debug logs """
    global DEBUG
    DEBUG = value


def debug(*args, **kwargs):
    if DEBUG:
        print(*args, **kwargs)


def error(*args, **kwargs):
    """Print message on stderr """
    print(*args, **kwargs, file=stderr)


class CascadeException(Exception):
    """Base class of all errors raised by euler_cascade"""
    pass


class ResolutionException(CascadeException):
    pass


class ConfigException(CascadeException):
    pass


class BlowUpException(CascadeException):
    """ Raised when a non finite value appears in the state. The partial trajectory is kept in #trajectory """

    def __init__(self, message, trajectory=None):
        super(BlowUpException, self).__init__(message)
        self.trajectory = trajectory


class ExceptionContext(AbstractContextManager):
    """ Re-raise errors of the enclosed block with a description of the context, keeping their type """

    def __init__(self, context):
        self.context = context

    def __exit__(self, exc_type, exc_val, exc_tb):
        # KeyboardInterrupt, SystemExit .. go through unchanged
        if isinstance(exc_val, Exception):
            if isinstance(exc_val, CascadeException):
                raise type(exc_val)("%s (%s)" % (str(exc_val), self.context)) from exc_val
            raise CascadeException("Context : %s" % str(self.context)) from exc_val
        return False


def _isnumber(value):
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def _isfinite(*values):
    return all(math.isfinite(v) for v in values)


def worker_count():
    """Size of the worker pool, bounded by the env var CASCADE_THREADS (1, sequential, by default)"""
    value = os.environ.get(THREADS_ENV)
    if value is None or value.strip() == "":
        return 1
    try:
        count = int(value)
    except ValueError:
        error("Invalid value '%s' for %s : running sequentially" % (value, THREADS_ENV))
        return 1
    return max(1, count)


def _parallel_map(f, items, workers=None):
    """ Map f over items, on a thread pool when more than one worker is allowed. Results keep the input order """
    if workers is None:
        workers = worker_count()
    items = list(items)
    if workers > 1 and len(items) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as exec:
            return list(exec.map(f, items))
    else:
        return list(map(f, items))
