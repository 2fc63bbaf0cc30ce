from app.commands.analyze import analyze
from app.commands.find_zero import find_zero
from app.commands.reproduce import reproduce
from app.commands.spectrum import spectrum
from app.commands.sweep import sweep

__all__ = ["analyze", "find_zero", "reproduce", "spectrum", "sweep"]
