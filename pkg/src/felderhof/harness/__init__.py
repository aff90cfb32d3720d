"""Sampling, identity suites, golden fixtures and the CLI."""

from .checks import REGISTRY, SUITES, CheckResult, run_suite, strip_timing
from .sampler import ConfigError, SuiteConfig, sample_safe_params

__all__ = ["REGISTRY", "SUITES", "CheckResult", "run_suite", "strip_timing", "ConfigError", "SuiteConfig", "sample_safe_params"]
