"""
Version management for fractrans
Single source of truth for all version-related information
"""

__version__ = "0.3.0"
__version_info__ = (0, 3, 0)

# Semantic versioning components
MAJOR = 0  # Breaking changes
MINOR = 3  # New kernels / models, backwards compatible
PATCH = 0  # Bug fixes

# Release information
RELEASE_DATE = "2026-10-19"
RELEASE_NAME = "Reconstructed Interface"

# Record format version (runs.jsonl and convergence CSV)
# 1.0: first error-report schema
# 1.1: added energy column and walltime_ms
DATA_FORMAT_VERSION = "1.1"

# Build/commit info (optional, can be populated by CI/CD)
BUILD_NUMBER = None
GIT_COMMIT = None


def get_version_string():
    """Get full version string"""
    return __version__


def get_version_display():
    """Get version string for display purposes"""
    if RELEASE_NAME:
        return f"v{__version__} ({RELEASE_NAME})"
    return f"v{__version__}"


def get_app_identifier():
    """Identifier written into manifests and run logs"""
    return f"fractrans v{__version__}"


def get_version_info():
    """Get comprehensive version information dictionary"""
    return {
        'version': __version__,
        'version_info': __version_info__,
        'major': MAJOR,
        'minor': MINOR,
        'patch': PATCH,
        'release_date': RELEASE_DATE,
        'release_name': RELEASE_NAME,
        'data_format_version': DATA_FORMAT_VERSION,
        'build_number': BUILD_NUMBER,
        'git_commit': GIT_COMMIT,
    }


def get_stack_versions():
    """Versions of the numerical stack, recorded in every manifest"""
    import platform
    import numpy
    import scipy

    return {
        'python': platform.python_version(),
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
        'fractrans': get_version_string(),
    }
