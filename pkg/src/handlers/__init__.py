# Handlers Package