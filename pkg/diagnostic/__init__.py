"""Scenario harness for thermoscan: environments, the runner CLI and the pytest bridge."""
