"""Batch workflow: manifests, feature caches, synthetic corpora and the CLI stages."""
