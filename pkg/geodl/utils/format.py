def round_half(
        value: float,
        decimals: int = 6
    ) -> float:
    """Round the way the csv writer prints, so aggregates can be recomputed from files."""
    return float(f"{value:.{decimals}f}")
