"""Dataset ingestion, one-pass evaluation and synthetic sequences."""
