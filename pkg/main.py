"""
Main entry point for the padic-ode command line
"""

import os
import sys
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Logs go to stderr so reports on stdout stay byte-identical
logging.basicConfig(
    level=os.getenv("PADIC_LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)


def main():
    """Main execution function"""
    from padic_ode.cli import run

    try:
        return run(sys.argv[1:])
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130


if __name__ == "__main__":
    sys.exit(main())
