"""
GridComply Custom Exceptions
"""
from typing import Optional, Any


class GridComplyException(Exception):
    """Base exception for GridComply application"""

    def __init__(
        self,
        message: str,
        error_code: str = "error",
        status_code: int = 400,
        details: Optional[Any] = None,
        exit_code: int = 2
    ):
        self.message = message
        self.error_code = error_code
        self.status_code = status_code
        self.details = details
        self.exit_code = exit_code
        super().__init__(self.message)


# Resource exceptions
class NotFoundError(GridComplyException):
    """Resource not found"""

    def __init__(self, resource: str = "Resource", resource_id: Optional[str] = None):
        message = f"{resource} not found"
        if resource_id:
            message = f"{resource} '{resource_id}' not found"
        super().__init__(
            message=message,
            error_code="not_found",
            status_code=404
        )


# Validation exceptions
class ValidationError(GridComplyException):
    """Validation failed"""

    def __init__(self, message: str, details: Optional[Any] = None, error_code: str = "validation_error"):
        super().__init__(
            message=message,
            error_code=error_code,
            status_code=422,
            details=details
        )


class InvalidParameterError(ValidationError):
    """Parameter outside its admissible range"""

    def __init__(self, name: str, value: Any, reason: str = "out of range"):
        super().__init__(
            message=f"Invalid parameter '{name}' = {value}: {reason}",
            details={"parameter": name, "value": value},
            error_code="invalid_parameter"
        )


class BadRange(ValidationError):
    """Frequency range or sample count is not usable"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message=message, details=details, error_code="bad_range")


class NotHermitian(ValidationError):
    """Matrix is not numerically Hermitian"""

    def __init__(self, defect: float):
        super().__init__(
            message=f"Matrix is not Hermitian (relative defect {defect:.3e})",
            details={"defect": defect},
            error_code="not_hermitian"
        )


class NotSymmetric(ValidationError):
    """Matrix is not numerically symmetric"""

    def __init__(self, defect: float):
        super().__init__(
            message=f"Matrix is not symmetric (relative defect {defect:.3e})",
            details={"defect": defect},
            error_code="not_symmetric"
        )


class NotRational(ValidationError):
    """Operation needs a state-space model, got sampled data"""

    def __init__(self, operation: str):
        super().__init__(
            message=f"{operation} requires a rational model, not frequency samples",
            error_code="not_rational"
        )


class ConjugationViolation(ValidationError):
    """Pole-residue data is not closed under conjugation"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message=message, details=details, error_code="conjugation_violation")


# Operating point exceptions
class OperatingPointError(GridComplyException):
    """Operating point is unusable for linearization"""

    def __init__(self, message: str, error_code: str = "operating_point_error", details: Optional[Any] = None):
        super().__init__(
            message=message,
            error_code=error_code,
            status_code=422,
            details=details
        )


class DegenerateVoltage(OperatingPointError):
    """Terminal voltage is zero, interface matrices are singular"""

    def __init__(self):
        super().__init__(
            message="Operating-point voltage is zero (vD0 = vQ0 = 0)",
            error_code="degenerate_voltage"
        )


class SingularOperatingPoint(OperatingPointError):
    """Linearization denominator vanishes at the operating point"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message=message, error_code="singular_operating_point", details=details)


class SingularLoad(OperatingPointError):
    """Load sensitivity matrix is singular"""

    def __init__(self, determinant: float):
        super().__init__(
            message=f"Load sensitivities are singular (k_pf*k_qv - k_pv*k_qf = {determinant:.3e})",
            error_code="singular_load",
            details={"determinant": determinant}
        )


# Network exceptions
class NetworkError(GridComplyException):
    """Network specification is unusable"""

    def __init__(self, message: str, error_code: str = "network_error", status_code: int = 422,
                 details: Optional[Any] = None):
        super().__init__(
            message=message,
            error_code=error_code,
            status_code=status_code,
            details=details
        )


class DisconnectedNetwork(NetworkError):
    """Network graph has more than one island"""

    def __init__(self, islands: int):
        super().__init__(
            message=f"Network is not connected ({islands} islands)",
            error_code="disconnected_network",
            details={"islands": islands}
        )


class UnknownBus(NetworkError):
    """Bus id not present in the network"""

    def __init__(self, bus_id: Any):
        super().__init__(
            message=f"Bus '{bus_id}' is not part of the network",
            error_code="unknown_bus",
            status_code=404,
            details={"bus_id": bus_id}
        )


# Numerical exceptions
class NumericalError(GridComplyException):
    """Numerical computation failed"""

    def __init__(self, message: str, error_code: str = "numerical_error", details: Optional[Any] = None):
        super().__init__(
            message=message,
            error_code=error_code,
            status_code=422,
            details=details
        )


class SingularResolvent(NumericalError):
    """Evaluation frequency coincides with a pole"""

    def __init__(self, omega: float, pole: complex):
        super().__init__(
            message=f"jΩ = j{omega:.6g} rad/s is a pole of the model",
            error_code="singular_resolvent",
            details={"omega": omega, "pole": [pole.real, pole.imag]}
        )


class NoConvergence(NumericalError):
    """Iterative algorithm did not converge"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message=message, error_code="no_convergence", details=details)


class IllConditioned(NumericalError):
    """Least-squares system is rank deficient"""

    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message=message, error_code="ill_conditioned", details=details)


class GridHitsPole(NumericalError):
    """Frequency grid passes through an imaginary-axis pole"""

    def __init__(self, omega: float, pole_omega: float):
        super().__init__(
            message=f"Grid point {omega:.6g} rad/s is within tolerance of the axis pole at {pole_omega:.6g} rad/s",
            error_code="grid_hits_pole",
            details={"omega": omega, "pole_omega": pole_omega}
        )


class ImproperInverse(NumericalError):
    """Feedthrough is singular, the inverse system is improper"""

    def __init__(self, condition: float):
        super().__init__(
            message=f"Feedthrough is singular or ill-conditioned (cond = {condition:.3e})",
            error_code="improper_inverse",
            details={"condition": condition}
        )


# Compliance exceptions
class ComplianceError(GridComplyException):
    """Device cannot meet an operator requirement"""

    def __init__(self, message: str, error_code: str = "compliance_error", details: Optional[Any] = None):
        super().__init__(
            message=message,
            error_code=error_code,
            status_code=400,
            details=details,
            exit_code=1
        )


class InsufficientKqv(ComplianceError):
    """Requested Q-V contribution exceeds what the device offers"""

    def __init__(self, requested: float, available: float):
        super().__init__(
            message=f"Requested k_qv^c = {requested:.4g} pu exceeds the available {available:.4g} pu",
            error_code="insufficient_kqv",
            details={"requested": requested, "available": available}
        )
