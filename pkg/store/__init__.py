"""
Storage layer: text formats, result documents and telemetry.
"""
