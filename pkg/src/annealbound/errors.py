"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed input: bad indices, mismatched dimensions, rejected JSON."""


class SizeCapError(ValidationError):
    """Requested system size exceeds the supported cap for the operation."""


class DegenerateGroundStateError(RuntimeError):
    """The classical cost Hamiltonian has a degenerate ground state.

    Carries the basis bitstrings realizing the degenerate minimum.
    """

    def __init__(self, states, energy, n_spins=None):
        self.states = list(states)
        self.energy = energy
        width = n_spins if n_spins else max(1, max(self.states).bit_length())
        labels = ", ".join(format(s, "b").zfill(width) for s in self.states)
        super().__init__(
            f"degenerate classical ground state (energy {energy:g}) on basis states: {labels}"
        )


class GapAnomalyError(RuntimeError):
    """Near-degenerate ground state at positive transverse field.

    The driven model has a unique ground state for any positive field, so a
    collapsed gap here indicates a reducible flip structure or a bug upstream.
    """


class ProvenanceMismatchError(ValueError):
    """Report and trajectory were produced from different problem/schedule inputs."""


class ConfigError(ValueError):
    """Experiment configuration failed schema validation or is inconsistent."""
