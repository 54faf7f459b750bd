"""HTTP service and shared operations wrapping the core library."""
