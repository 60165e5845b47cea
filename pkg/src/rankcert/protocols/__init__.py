from .base import (
    ChallengeSource,
    Channel,
    CostMeter,
    EngineError,
    FiatShamirChallenges,
    InteractiveChallenges,
    MalformedCertificate,
    Message,
    WitnessUnavailable,
    ProtocolAbort,
    ProtocolOrderError,
    RunResult,
    Verdict,
)

__all__ = [
    "ChallengeSource",
    "Channel",
    "CostMeter",
    "EngineError",
    "FiatShamirChallenges",
    "InteractiveChallenges",
    "MalformedCertificate",
    "Message",
    "WitnessUnavailable",
    "ProtocolAbort",
    "ProtocolOrderError",
    "RunResult",
    "Verdict",
]
