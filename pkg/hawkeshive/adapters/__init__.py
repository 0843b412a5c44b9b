"""File formats: model specs, result tables and event ingestion."""
