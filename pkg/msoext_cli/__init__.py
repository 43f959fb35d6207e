"""
msoext - model checking MSO with global and local cardinality constraints.
"""

import logging
from pathlib import Path

__version__ = "1.0.0"

# Configure basic logging
logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

logger = logging.getLogger(__name__)

# Default configuration directory
config_dir = Path.home() / '.msoext'

__all__ = ['__version__', 'config_dir']
