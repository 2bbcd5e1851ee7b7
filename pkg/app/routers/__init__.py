# Seirkit Routers
