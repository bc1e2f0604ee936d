"""Binary order embeddings for concept hierarchies."""
