"""Cross-cutting concerns: settings, errors, logging and metrics."""
