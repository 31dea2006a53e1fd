from .params import GpParams, GevParams, ExcessSample, BlockMaximaSample, NhppData
from .prior import PriorFamily, PriorSpec, JeffreysGevComponents, PriorCatalogEntry
from .propriety import QuadConfig, VerdictStatus, PartialIntegral, ProprietyVerdict, TheoremRow, TheoremReport, BoundCheck, BoundSuiteReport
from .mcmc import McmcConfig, Chain, Diagnostics, ReturnLevelSummary
from .report import RunConfig, ReportDocument
