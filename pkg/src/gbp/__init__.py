"""Green bin packing."""
