"""Angular-margin loss laboratory.

Thin Python layer over the C++ core: angular-margin and circle losses with
analytic gradients, margin schedules, a deterministic toy training harness,
and speaker-verification metrics (EER, minDCF).
"""

from circlelab._core import *  # noqa: F401,F403
