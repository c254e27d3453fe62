# Schemas for input and output document validation
from pfmulti.schemas.materials import (ElasticProps, PlasticProps, FractureParams, CorrosionParams,
                                       FluidParams, HydrogenParams, HeatParams)
from pfmulti.schemas.config import Config, parse_config, dump_config
from pfmulti.schemas.manifest import RunManifest
