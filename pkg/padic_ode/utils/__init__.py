# Shared exact-arithmetic helpers

from .hull import lower_hull, hull_segments, breakpoints_in

__all__ = ['lower_hull', 'hull_segments', 'breakpoints_in']
