# Visualization Package
