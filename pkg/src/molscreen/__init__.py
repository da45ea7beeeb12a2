"""molscreen: scaffold-aware screening pipeline for molecular additives.

Library layout mirrors the pipeline stages: ``molgraph`` (SMILES graphs),
``scaffold`` (Murcko scaffolds and the known/novel gate), ``features``
(keys, descriptors, latent ingestion), ``selection`` (the normalization /
variance / correlation cascade), ``models`` (GB, RF, SVR), ``evaluation``
(splitters, metrics, repeated harness) and ``screening`` (the five-tier
funnel). ``cli`` exposes all of it as subcommands.
"""

__version__ = "0.1.0"
