"""Reference interpreter and conformance checking."""
