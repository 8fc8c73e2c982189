"""Exception hierarchy shared by every swashmass module."""


class SwashMassError(Exception):
    """Base class for all library errors."""


class GimbalLock(SwashMassError):
    """Euler-rate transform requested too close to |theta| = pi/2."""


class OutOfRange(SwashMassError):
    """A swash-mass displacement exceeds the stroke limit L."""


class SingularInertia(SwashMassError):
    """Inertia matrix is (numerically) singular."""


class InfeasibleAllocation(SwashMassError):
    """Requested thrust/yaw pair needs a negative squared rotor speed."""


class NearSingularAttitude(SwashMassError):
    """A control law would divide by a cosine smaller than the guard."""


class ZeroThrust(SwashMassError):
    """A control law needs strictly positive thrust."""


class MalformedTable(SwashMassError):
    """Trajectory table is too short, unsorted, or badly formatted."""


class Diverged(SwashMassError):
    """Closed-loop simulation left the finite / bounded region.

    ``log`` carries whatever was recorded before the failure, ``time`` the
    simulation time at which divergence was detected.
    """

    def __init__(self, message, time=None, log=None):
        super().__init__(message)
        self.time = time
        self.log = log


class EmptyLog(SwashMassError):
    """Metric requested on a log without samples."""


class ConfigError(SwashMassError):
    """Invalid run configuration; ``field`` and ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        location = ""
        if field is not None:
            location = f"[{field}] "
        if line is not None:
            location += f"(line {line}) "
        super().__init__(location + message)
        self.field = field
        self.line = line
