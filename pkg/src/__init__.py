# Latent Cluster: deep unsupervised clustering engine
