# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Ergodic-Ensembles utilities."""

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor

import charset_normalizer
from flask import current_app, has_app_context

from . import config

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def config_value(key, value=None):
    """Resolve a configuration value.

    An explicit ``value`` wins. Otherwise the current application's config is
    used inside an app context and the package default outside of one.
    """
    if value is not None:
        return value
    default = getattr(config, key)
    if has_app_context():
        return current_app.config.get(key, default)
    return default


def get_logger():
    """Return the application logger, or the package logger outside an app."""
    if has_app_context():
        return current_app.logger
    return logging.getLogger("ergodic_ensembles")


def mix64(value):
    """SplitMix64 finalizer."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed, stream_index):
    """Seed of substream ``stream_index`` of ``master_seed``.

    ``mix64(master_seed XOR (stream_index * 0x9E3779B97F4A7C15 mod 2**64))``.
    """
    if stream_index < 0:
        raise ValueError("Stream index must be non-negative.")
    return mix64((master_seed & MASK64) ^ ((stream_index * GOLDEN_GAMMA) & MASK64))


def resolve_threads(threads=None):
    """Number of worker threads, ``0`` meaning one per CPU."""
    threads = config_value("ERGODIC_THREADS", threads)
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def _with_app_context(app, fn):
    def call(item):
        with app.app_context():
            return fn(item)

    return call


def run_ordered(fn, items, threads=1):
    """Apply ``fn`` to every item, returning results in input order.

    Workers run inside the caller's application context, so configuration
    overrides apply for any thread count.
    """
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    if has_app_context():
        fn = _with_app_context(current_app._get_current_object(), fn)
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as executor:
        return list(executor.map(fn, items))


def digest_bytes(data):
    """Content hash used by manifests and table headers."""
    return "sha256:" + hashlib.sha256(data).hexdigest()


def detect_encoding(fp, default=None):
    """Detect the character encoding of a file.

    :param fp: Open Python file pointer.
    :param default: Fallback encoding to use.
    :returns: The detected encoding.

    .. note:: The file pointer is returned at its original read position.
    """
    init_pos = fp.tell()
    try:
        chardet_size = config_value("ERGODIC_CHARDET_BYTES")
        threshold = config_value("ERGODIC_CHARDET_CONFIDENCE")

        sample = fp.read(chardet_size)

        # Result contains 'confidence' and 'encoding'
        result = charset_normalizer.detect(sample)
        confidence = result.get("confidence", 0) or 0
        encoding = result.get("encoding", default) or default

        # ascii is a subset of the utf-8 default
        if confidence <= threshold or encoding == "ascii":
            encoding = default

        return encoding
    except Exception:
        get_logger().warning("Encoding detection failed.", exc_info=True)
        return default
    finally:
        fp.seek(init_pos)
