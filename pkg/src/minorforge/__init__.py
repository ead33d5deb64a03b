"""Complete minors in random regular graphs: samplers, builder, oracles."""

__version__ = "0.1.0"
