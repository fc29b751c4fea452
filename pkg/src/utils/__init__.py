# Shared utilities: environment config, logging, errors, helpers
