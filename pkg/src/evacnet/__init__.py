"""Detection, classification, archival, and redistribution of hurricane
evacuation notices from official county and state channels."""

__version__ = "0.1.0"
