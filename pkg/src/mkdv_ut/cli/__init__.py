"""Command-line pipeline, presets and validation suites."""
