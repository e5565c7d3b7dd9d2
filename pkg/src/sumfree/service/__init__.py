"""HTTP service wrapping the sumfree package."""
