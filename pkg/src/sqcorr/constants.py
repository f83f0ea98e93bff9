"""Shared physical defaults."""

DEFAULT_REP_RATE_HZ = 1.866e7

# pulse spacing implied by the repetition rate, in picoseconds
LASER_PERIOD_PS = 1e12 / DEFAULT_REP_RATE_HZ

DEFAULT_JITTER_SIGMA_PS = 100.0
