"""oncoabstract: oncology attribute extraction from multi-document patient
text with patient-level registry supervision, plus case finding and an
assisted-curation service, exercised end to end on a deterministic
synthetic EMR corpus."""

__version__ = "0.1.0"
