"""archpairs: mine architecture-related Q&A threads and extract
issue-solution sentence pairs via multi-feature sentence scoring."""

__version__ = "0.1.0"
