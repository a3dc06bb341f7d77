"""Policy-as-code scanner for GDPR privacy requirements over cloud inventory snapshots."""

__version__ = "0.1.0"
